#include "degen/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace degen {

namespace {

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::set<std::string> defined;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        const auto path = key_path();
        skip_ws();
        expect(']');
        end_of_line();
        std::string joined;
        for (const auto& k : path) joined += (joined.empty() ? "" : ".") + k;
        if (!defined.insert(joined).second) fail("table [" + joined + "] defined twice");
        table = &root;
        for (const auto& k : path) {
          nlohmann::json& next = (*table)[k];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("key '" + k + "' is not a table");
          table = &next;
        }
        continue;
      }
      const auto path = key_path();
      skip_ws();
      expect('=');
      skip_ws();
      nlohmann::json value = parse_value();
      end_of_line();
      nlohmann::json* target = table;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        nlohmann::json& next = (*target)[path[i]];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) fail("key '" + path[i] + "' is not a table");
        target = &next;
      }
      if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
      (*target)[path.back()] = std::move(value);
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("TOML line " + std::to_string(line_) + ": " + what);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void newline() {
    if (peek() == '\r') ++pos_;
    if (peek() == '\n') {
      ++pos_;
      ++line_;
    }
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r')
        newline();
      else
        break;
    }
  }
  void skip_ws_newlines_comments() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r')
        newline();
      else
        break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n' && peek() != '\r') fail("unexpected trailing characters");
    newline();
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> path;
    while (true) {
      skip_ws();
      if (peek() == '"')
        path.push_back(basic_string());
      else if (peek() == '\'')
        path.push_back(literal_string());
      else {
        std::string k;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
          k += s_[pos_++];
        if (k.empty()) fail("expected a key");
        path.push_back(k);
      }
      skip_ws();
      if (peek() != '.') break;
      ++pos_;
    }
    return path;
  }

  std::string basic_string() {
    expect('"');
    if (s_.substr(pos_, 2) == "\"\"") fail("multi-line strings are not supported");
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      c = s_[pos_++];
      switch (c) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + c);
      }
    }
    return out;
  }

  std::string literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  nlohmann::json parse_value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return parse_array();
    if (c == '{') fail("inline tables are not supported");
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '+' || peek() == '-' || peek() == '.' || peek() == ':'))
      tok += s_[pos_++];
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.find(':') != std::string::npos ||
        (tok.size() >= 5 && std::isdigit(static_cast<unsigned char>(tok[0])) && tok[4] == '-'))
      fail("dates and times are not supported");
    std::string num;
    for (char ch : tok)
      if (ch != '_') num += ch;
    std::string body = num;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) body = body.substr(1);
    if (body == "inf" || body == "nan") {
      const double v = body == "inf" ? HUGE_VAL : std::nan("");
      return num[0] == '-' ? -v : v;
    }
    const bool is_float = num.find_first_of(".eE") != std::string::npos;
    char* end = nullptr;
    if (is_float) {
      const double v = std::strtod(num.c_str(), &end);
      if (*end != '\0') fail("invalid number '" + tok + "'");
      return v;
    }
    const long long v = std::strtoll(num.c_str(), &end, 10);
    if (*end != '\0' || num.empty()) fail("invalid value '" + tok + "'");
    return v;
  }

  nlohmann::json parse_array() {
    expect('[');
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
      skip_ws_newlines_comments();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_newlines_comments();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

// --- typed access ----------------------------------------------------------

void allow_keys(const nlohmann::json& table, const std::string& name,
                std::initializer_list<const char*> keys) {
  if (!table.is_object()) throw ConfigError("[" + name + "] must be a table");
  for (const auto& [k, v] : table.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in [" + name + "]");
  }
}

double number(const nlohmann::json& t, const char* key, double fallback) {
  if (!t.contains(key)) return fallback;
  if (!t[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return t[key].get<double>();
}

long long integer(const nlohmann::json& t, const char* key, long long fallback) {
  if (!t.contains(key)) return fallback;
  if (!t[key].is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return t[key].get<long long>();
}

std::string text(const nlohmann::json& t, const char* key, const std::string& fallback) {
  if (!t.contains(key)) return fallback;
  if (!t[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return t[key].get<std::string>();
}

std::string expression(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  throw ConfigError(where + " must be an expression string or a number");
}

std::vector<double> numbers(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& p,
                               const std::string& where) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  if (!std::filesystem::exists(path))
    throw ConfigError(where + " refers to a missing file: " + path.string());
  return path;
}

const std::set<std::string> kAnalysisOps = {
    "fit_boundary_decay", "weighted_derivative_decay", "holder_seminorm",
    "weighted_norm",      "normal_trace_check",        "tangential_bound_check",
    "detect_log_factor"};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

nlohmann::json load_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

ProblemConfig ProblemConfig::from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir,
                                       bool require_problem) {
  allow_keys(j, "root",
             {"seed", "grid", "coefficients", "manufactured", "solve", "analysis", "barrier",
              "acceptance"});
  ProblemConfig cfg;
  const long long seed = integer(j, "seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    allow_keys(g, "grid", {"dim", "N", "M", "gamma"});
    cfg.grid.dim = static_cast<int>(integer(g, "dim", cfg.grid.dim));
    cfg.grid.N = static_cast<int>(integer(g, "N", cfg.grid.N));
    cfg.grid.M = static_cast<int>(integer(g, "M", cfg.grid.M));
    cfg.grid.gamma = number(g, "gamma", cfg.grid.gamma);
  }
  const int n = cfg.grid.dim;
  if (n != 2 && n != 3) throw ConfigError("grid.dim must be 2 or 3");

  const bool has_coeffs = j.contains("coefficients");
  const bool has_manufactured = j.contains("manufactured");
  if (has_coeffs && has_manufactured)
    throw ConfigError("give exactly one of [coefficients] and [manufactured], not both");
  if (require_problem && !has_coeffs && !has_manufactured)
    throw ConfigError("missing problem: give [coefficients] or [manufactured]");

  if (has_coeffs) {
    const auto& c = j["coefficients"];
    allow_keys(c, "coefficients", {"a", "b", "c", "f", "f_file", "boundary"});
    CoefficientConfig cc;
    if (!c.contains("c")) throw ConfigError("coefficients.c is missing");
    cc.c = expression(c["c"], "coefficients.c");
    cc.a.assign(static_cast<std::size_t>(n * n), "0");
    if (!c.contains("a")) {
      for (int i = 0; i < n; ++i) cc.a[i * n + i] = "1";
    } else if (c["a"].is_array()) {
      if (c["a"].size() != static_cast<std::size_t>(n))
        throw ConfigError("coefficients.a must have " + std::to_string(n) + " rows");
      for (int i = 0; i < n; ++i) {
        const auto& row = c["a"][i];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
          throw ConfigError("coefficients.a rows must have " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k) cc.a[i * n + k] = expression(row[k], "coefficients.a");
      }
    } else {
      const std::string d = expression(c["a"], "coefficients.a");
      for (int i = 0; i < n; ++i) cc.a[i * n + i] = d;
    }
    cc.b.assign(static_cast<std::size_t>(n), "0");
    if (c.contains("b")) {
      if (!c["b"].is_array() || c["b"].size() != static_cast<std::size_t>(n))
        throw ConfigError("coefficients.b must be an array of " + std::to_string(n) +
                          " expressions");
      for (int i = 0; i < n; ++i) cc.b[i] = expression(c["b"][i], "coefficients.b");
    }
    if (c.contains("f") && c.contains("f_file"))
      throw ConfigError("give coefficients.f or coefficients.f_file, not both");
    if (c.contains("f")) cc.f = expression(c["f"], "coefficients.f");
    if (c.contains("f_file"))
      cc.f_file = existing(base_dir, text(c, "f_file", ""), "coefficients.f_file");
    if (!cc.f && !cc.f_file) throw ConfigError("coefficients.f is missing");
    if (!c.contains("boundary"))
      throw ConfigError("coefficients.boundary (lateral/top Dirichlet data) is missing");
    cc.boundary = expression(c["boundary"], "coefficients.boundary");
    cfg.coefficients = std::move(cc);
  }

  if (has_manufactured) {
    const auto& m = j["manufactured"];
    allow_keys(m, "manufactured", {"case", "a", "b", "s", "psi"});
    ManufacturedConfig mc;
    try {
      mc.tag = case_tag_from_string(text(m, "case", "monomial"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    mc.a = number(m, "a", mc.a);
    mc.b = number(m, "b", mc.b);
    mc.s = number(m, "s", mc.s);
    if (m.contains("psi")) mc.psi = expression(m["psi"], "manufactured.psi");
    cfg.manufactured = mc;
  }

  if (j.contains("solve")) {
    const auto& s = j["solve"];
    allow_keys(s, "solve",
               {"mode", "delta0", "ratio", "max_steps", "linear_tol", "stop_tol", "linear"});
    try {
      if (s.contains("mode")) cfg.solve.mode = solve_mode_from_string(text(s, "mode", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    cfg.solve.delta0 = number(s, "delta0", cfg.solve.delta0);
    cfg.solve.ratio = number(s, "ratio", cfg.solve.ratio);
    cfg.solve.max_steps = static_cast<int>(integer(s, "max_steps", cfg.solve.max_steps));
    cfg.solve.linear_tol = number(s, "linear_tol", cfg.solve.linear_tol);
    cfg.solve.stop_tol = number(s, "stop_tol", cfg.solve.stop_tol);
    const std::string lin = text(s, "linear", "automatic");
    if (lin == "automatic")
      cfg.solve.linear = LinearSolverKind::automatic;
    else if (lin == "krylov")
      cfg.solve.linear = LinearSolverKind::krylov;
    else if (lin == "sparse_lu")
      cfg.solve.linear = LinearSolverKind::sparse_lu;
    else
      throw ConfigError("solve.linear must be automatic, krylov or sparse_lu");
  }
  try {
    cfg.solve.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solve: ") + e.what());
  }

  if (j.contains("analysis")) {
    const auto& a = j["analysis"];
    allow_keys(a, "analysis",
               {"operations", "anchor", "window", "alpha", "k", "sample_pairs", "s", "inner",
                "u_file"});
    if (a.contains("operations")) {
      if (!a["operations"].is_array()) throw ConfigError("analysis.operations must be an array");
      for (const auto& op : a["operations"]) {
        if (!op.is_string() || !kAnalysisOps.count(op.get<std::string>()))
          throw ConfigError("unknown analysis operation " + op.dump());
        cfg.analysis.operations.push_back(op.get<std::string>());
      }
    }
    if (a.contains("anchor")) {
      const auto v = numbers(a["anchor"], "analysis.anchor");
      if (v.size() != static_cast<std::size_t>(n - 1))
        throw ConfigError("analysis.anchor must have " + std::to_string(n - 1) + " entries");
      for (int i = 0; i < n - 1; ++i) cfg.analysis.anchor[i] = v[i];
    }
    if (a.contains("window")) {
      const auto v = numbers(a["window"], "analysis.window");
      if (v.size() != 2) throw ConfigError("analysis.window must be [lo, hi]");
      cfg.analysis.window = FitWindow{v[0], v[1]};
    }
    cfg.analysis.alpha = number(a, "alpha", cfg.analysis.alpha);
    cfg.analysis.k = static_cast<int>(integer(a, "k", cfg.analysis.k));
    const long long pairs = integer(a, "sample_pairs", 2000);
    if (pairs < 0) throw ConfigError("analysis.sample_pairs must be non-negative");
    cfg.analysis.sample_pairs = static_cast<std::size_t>(pairs);
    if (a.contains("s")) cfg.analysis.s = number(a, "s", 0.0);
    if (a.contains("inner")) {
      const auto& r = a["inner"];
      if (!r.is_array() || r.size() != 2)
        throw ConfigError("analysis.inner must be [[lo...], [hi...]]");
      const auto lo = numbers(r[0], "analysis.inner"), hi = numbers(r[1], "analysis.inner");
      if (lo.size() != static_cast<std::size_t>(n) || hi.size() != static_cast<std::size_t>(n))
        throw ConfigError("analysis.inner corners must have " + std::to_string(n) + " entries");
      Region reg;
      for (int i = 0; i < n; ++i) {
        reg.lo[i] = lo[i];
        reg.hi[i] = hi[i];
      }
      cfg.analysis.inner = reg;
    }
    if (a.contains("u_file"))
      cfg.analysis.u_file = existing(base_dir, text(a, "u_file", ""), "analysis.u_file");
  }

  if (j.contains("barrier")) {
    const auto& b = j["barrier"];
    allow_keys(b, "barrier", {"sigma", "mu", "tangential", "levels", "t_min"});
    BarrierConfig bc;
    bc.sigma = number(b, "sigma", bc.sigma);
    bc.mu = number(b, "mu", bc.mu);
    bc.tangential = static_cast<int>(integer(b, "tangential", bc.tangential));
    bc.levels = static_cast<int>(integer(b, "levels", bc.levels));
    bc.t_min = number(b, "t_min", bc.t_min);
    if (bc.tangential < 2 || bc.levels < 2) throw ConfigError("barrier sample sizes must be >= 2");
    if (!(bc.t_min > 0.0 && bc.t_min < 1.0)) throw ConfigError("barrier.t_min must lie in (0, 1)");
    cfg.barrier = bc;
  }

  if (j.contains("acceptance")) {
    if (!j["acceptance"].is_object()) throw ConfigError("[acceptance] must be a table");
    cfg.acceptance = j["acceptance"];
  }
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path, bool require_problem) {
  return ProblemConfig::from_json(load_toml(path), path.parent_path(), require_problem);
}

std::shared_ptr<const Grid> build_grid(const GridConfig& g) {
  try {
    return std::make_shared<const Grid>(Grid::make(g.dim, g.N, g.M, g.gamma));
  } catch (const GridError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

namespace {

Expr parse_expr(const std::string& text, int dim, const std::string& where) {
  try {
    return Expr::parse(text, dim);
  } catch (const ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

OperatorCoefficients build_coefficients(const CoefficientConfig& c, int dim) {
  std::vector<Expr> a, b;
  for (std::size_t i = 0; i < c.a.size(); ++i)
    a.push_back(parse_expr(c.a[i], dim, "coefficients.a[" + std::to_string(i / dim) + "][" +
                                            std::to_string(i % dim) + "]"));
  for (std::size_t i = 0; i < c.b.size(); ++i)
    b.push_back(parse_expr(c.b[i], dim, "coefficients.b[" + std::to_string(i) + "]"));
  return OperatorCoefficients(dim, std::move(a), std::move(b),
                              parse_expr(c.c, dim, "coefficients.c"));
}

Problem build_problem(const ProblemConfig& cfg) {
  auto grid = build_grid(cfg.grid);
  const int n = cfg.grid.dim;
  if (cfg.manufactured) {
    const auto& m = *cfg.manufactured;
    ManufacturedCase mc = [&] {
      try {
        return ManufacturedCase::make(m.tag, m.a, m.b, m.s,
                                      parse_expr(m.psi, n, "manufactured.psi"), n);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("manufactured: ") + e.what());
      }
    }();
    FieldPair pair = sample_pair(mc, grid);
    BoundaryData bd = BoundaryData::from_field(pair.u);
    return Problem{grid, mc.coefficients(), std::move(pair.f), std::move(bd), mc,
                   std::move(pair.u)};
  }
  if (!cfg.coefficients) throw ConfigError("missing problem: give [coefficients] or [manufactured]");
  const auto& c = *cfg.coefficients;
  OperatorCoefficients coeffs = build_coefficients(c, n);
  const Expr bexpr = parse_expr(c.boundary, n, "coefficients.boundary");
  auto eval = [n](const Expr& e) {
    return [&e, n](const Point& p) { return e.eval(std::span<const double>(p.data(), n)); };
  };
  std::optional<ScalarField> f;
  if (c.f) {
    const Expr fexpr = parse_expr(*c.f, n, "coefficients.f");
    f = ScalarField::sample(grid, eval(fexpr));
  } else {
    std::ifstream in(*c.f_file);
    try {
      f = read_field_csv(in, grid);
    } catch (const std::exception& e) {
      throw ConfigError("coefficients.f_file: " + std::string(e.what()));
    }
  }
  BoundaryData bd = BoundaryData::from_function(*grid, eval(bexpr));
  return Problem{grid, std::move(coeffs), std::move(*f), std::move(bd), std::nullopt,
                 std::nullopt};
}

}  // namespace degen
