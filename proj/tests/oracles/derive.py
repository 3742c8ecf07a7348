"""Independent reference values frozen into the unit tests (sympy/numpy)."""
import numpy as np
import sympy as sp

t, x, mu, kap = sp.symbols("t x mu kappa", real=True)


def Q(ann, bn, c, m):
    return m * (m - 1) * ann + m * bn + c


def L(u, a=1, b=0, c=0):
    # t^2 a (u_xx + u_tt) + t b u_t + c u in two dimensions
    return sp.simplify(t**2 * a * (sp.diff(u, x, 2) + sp.diff(u, t, 2)) + t * b * sp.diff(u, t) + c * u)


print("graded coords", [sp.Rational(j, 4) ** 2 for j in range(5)])
print("Q(0), Q(1.5) c=-3/4", Q(1, 0, sp.Rational(-3, 4), 0), Q(1, 0, sp.Rational(-3, 4), sp.Rational(3, 2)))
print("Q(1) b=1 c=-1", Q(1, 1, -1, 1))
print("roots c=-3/4", sp.solve(Q(1, 0, sp.Rational(-3, 4), mu), mu))
print("roots b=1 c=-1", sp.solve(Q(1, 1, -1, mu), mu))
print("Q(1/2) c=-1", Q(1, 0, -1, sp.Rational(1, 2)), "Q(2)", Q(1, 0, -1, 2))
print("conjugate k=1: c ->", Q(1, 0, -1, -1))
print("root condition c(1,0,3/2)", -Q(1, 0, 0, sp.Rational(3, 2)), "c(1,1,1)", -Q(1, 1, 0, 1))
s = sp.Rational(3, 2)
print("L((1+t)t^1.5)", sp.simplify(L((1 + t) * t**s, c=sp.Rational(-3, 4))))
print("L(t log t) a=1 b=1 c=-1", sp.simplify(L(t * sp.log(t), b=1, c=-1)))
a_, b_, s_ = sp.symbols("a b s", positive=True)
u = t**s_ * sp.log(t)
print("case2 psi=1 f", sp.factor(sp.simplify(L(u, a_, b_, -Q(a_, b_, 0, s_)))))
print("L(t^2.5) s=2.5 c", -Q(1, 0, 0, sp.Rational(5, 2)))

# t|log t| fitted in log-log over log-uniform samples of [1e-4, 1e-1].
ts = np.logspace(-4, -1, 2001)
A = np.vstack([np.log(ts), np.ones_like(ts)]).T
coef, res, *_ = np.linalg.lstsq(A, np.log(ts * np.abs(np.log(ts))), rcond=None)
pred = A @ coef
y = np.log(ts * np.abs(np.log(ts)))
r2 = 1 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2)
print("t log t log-log slope on [1e-4,0.1]", coef[0], "R2", r2)

# barrier: sigma=0, mu=2, eps=1, K=0 at (0, 0.5): (x^2+t^2)
psi = x**2 + t**2
print("barrier value", psi.subs({x: 0, t: sp.Rational(1, 2)}), "dt", sp.diff(psi, t).subs(t, sp.Rational(1, 2)))

# normal trace example: u=1+t, f=-3(1+t), b=0, c=-3
print("u1", (sp.diff(-3 * (1 + t), t) - 0) / (0 + (-3)))
