"""Coefficient-level polynomial helpers.

Coefficients are stored ascending: ``coeffs[k]`` multiplies ``x**k``.  All
routines are generic over the scalar type, so the model catalog can run them
on exact ``fractions.Fraction`` values while the numerics use floats.
"""
from __future__ import annotations


def peval(coeffs, x):
    """Evaluate a polynomial by Horner's rule."""
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def pderiv(coeffs):
    """Coefficients of the derivative."""
    if len(coeffs) <= 1:
        return (0 * coeffs[0],) if coeffs else (0,)
    return tuple(k * c for k, c in enumerate(coeffs) if k > 0)


def pmul(a, b):
    """Product of two coefficient sequences."""
    out = [0 * (a[0] * b[0])] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return tuple(out)


def pshift(coeffs, h):
    """Coefficients of p(x + h) (Taylor shift by repeated synthetic division)."""
    a = list(coeffs)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] = a[j] + h * a[j + 1]
    return tuple(a)


def pdiv_linear(coeffs, root):
    """Divide p(x) by (x - root): return (quotient coeffs, remainder)."""
    n = len(coeffs)
    if n < 2:
        raise ValueError("cannot divide a constant polynomial by a linear factor")
    q = [0 * coeffs[0]] * (n - 1)
    acc = coeffs[-1]
    for k in range(n - 2, -1, -1):
        q[k] = acc
        acc = coeffs[k] + root * acc
    return tuple(q), acc
