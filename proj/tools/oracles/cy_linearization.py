#!/usr/bin/env python3
"""Frozen pointwise identities for the balanced Calabi-Yau solver.

Validates, with exact pointwise inputs, every algebraic building block of the
log-determinant equation

    log det( omega_h + (Lap_a u * alpha - i ddbar u)/(n-1)
             + chi(du) + E u )  =  psi + b + log det alpha,

where omega_h = star_a(omega^{n-1}/(n-1)!) and E = star_a(i ddbar alpha^{n-2}).
The exterior-algebra machinery of exterior_conventions.py is the independent
reference; the C++ kernels must reproduce the frozen numbers printed below.
"""

import importlib.util
import pathlib

import numpy as np

_spec = importlib.util.spec_from_file_location(
    "exterior_conventions",
    pathlib.Path(__file__).with_name("exterior_conventions.py"))
xc = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(xc)

rng = np.random.default_rng(2024)
results = []


def check(name, ok, detail=""):
    results.append(ok)
    print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")


def metric_form(M):
    return {((j,), (k,)): 1j * M[j, k] for j in range(M.shape[0])
            for k in range(M.shape[0])}


def form_matrix(f):
    """(1,1)-form coefficients c = i H[j,k] -> matrix H."""
    n = 3
    H = np.zeros((n, n), dtype=complex)
    for (J, K), c in f.items():
        H[J[0], K[0]] = c / 1j
    return H


def star_alpha(f, A, p, q, n=3):
    """Congruence-frame star: transform to an alpha-orthonormal coframe,
    apply the flat star, transform back."""
    C = xc.congruence(A)
    fw = xc.transform(f, C, n)
    sw = xc.star_flat(fw, n, p, q)
    return xc.transform(sw, np.linalg.inv(C), n)


def conformal_E():
    """alpha = e^f delta at n = 3: E = star_a(i ddbar alpha).

    i ddbar alpha = (i ddbar e^f) ^ beta with beta the flat form, and the
    (1,1)-star identity gives the closed form
        E[j,k] = e^{-f} (delta_jk * S - P[j,k]),   P = ddbar e^f,  S = tr P.
    """
    n = 3
    ef = 1.37
    Praw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    P = 0.5 * (Praw + Praw.conj().T)       # Hermitian ddbar(e^f) at the point
    A = ef * np.eye(n)
    ddbar_alpha = xc.wedge(metric_form(P), metric_form(np.eye(n)), 1, 1)
    E_machine = form_matrix(star_alpha(ddbar_alpha, A, 2, 2))
    S = np.trace(P).real
    E_closed = (np.eye(n) * S - P) / ef
    check("E closed form e^{-f}(S delta - ddbar e^f) matches congruence star",
          np.allclose(E_machine, E_closed, atol=1e-10),
          f"max diff={np.abs(E_machine - E_closed).max():.2e}")
    print(f"frozen: E[0][0] = {E_closed[0, 0].real:.12f}, "
          f"E[0][1] = {E_closed[0, 1]:.12f} at the seed-2024 sample")

    # alpha-trace route: tr_a E = n! * X with X omega_a^n = i ddbar alpha^{n-2} ^ alpha
    wa = metric_form(A)
    num = xc.wedge(ddbar_alpha, wa, 2, 1)
    full = (tuple(range(n)), tuple(range(n)))
    X = num.get(full, 0.0) / xc.power(wa, n, 1, 1)[full]
    trE = np.trace(np.linalg.inv(A) @ E_closed)
    check("tr_a E = n! X  (n! = 6 at n = 3)",
          abs(trE - 6.0 * X) < 1e-10,
          f"trE={trE.real:.10f} 6X={(6 * X).real:.10f}")
    check("tr_a E = 2 e^{-2f} tr(ddbar e^f): conformal trace sign follows S",
          abs(trE - 2.0 * S / ef ** 2) < 1e-12)

    # chain rule ddbar e^f = e^f (ddbar f + df odot dbar f)
    fval = np.log(ef)
    fj = rng.normal(size=n) + 1j * rng.normal(size=n)
    F2raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    F2 = 0.5 * (F2raw + F2raw.conj().T)
    P2 = np.exp(fval) * (F2 + np.outer(fj, np.conj(fj)))
    dd_direct = np.exp(fval) * (F2 + np.outer(fj, np.conj(fj)))
    check("ddbar e^f = e^f (ddbar f + d f (x) dbar f) is Hermitian",
          np.allclose(P2, P2.conj().T) and np.allclose(P2, dd_direct))


def ricci_conformal():
    """Ric(e^f delta) = -i ddbar log det = -n i ddbar f."""
    n = 3
    F2raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    F2 = 0.5 * (F2raw + F2raw.conj().T)    # ddbar f at the point
    ric = -n * F2                           # log det(e^f delta) = n f
    check("Ric(e^f delta) matrix = -n ddbar f (pointwise algebra)",
          np.allclose(ric, -3 * F2))
    print(f"frozen: Ric coefficient -n = -3 at n = 3")


def trace_identity():
    """tr_a[(Lap_a u) alpha - i ddbar u] = (n-1) Lap_a u for any alpha, u."""
    n = 3
    Araw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = Araw @ Araw.conj().T + n * np.eye(n)
    Uraw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    U = 0.5 * (Uraw + Uraw.conj().T)       # ddbar u at the point
    lap = np.trace(np.linalg.inv(A) @ U).real
    lhs = np.trace(np.linalg.inv(A) @ (lap * A - U)).real
    check("tr_a[(Lap u) alpha - ddbar u] = (n-1) Lap u",
          abs(lhs - (n - 1) * lap) < 1e-12,
          f"lhs={lhs:.10f} (n-1)Lap={(n - 1) * lap:.10f}")


def flat_alpha_chain():
    """Flat alpha: the whole log-det chain is exact cofactor algebra."""
    n = 3
    Graw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    G = Graw @ Graw.conj().T + n * np.eye(n)
    wg = metric_form(G)
    Q = xc.power(wg, n - 1, 1, 1)
    Q = {k: v / 2.0 for k, v in Q.items()}             # /(n-1)!
    Om = form_matrix(xc.star_flat(Q, n, n - 1, n - 1))  # = cof(G)^T
    cofT = (np.linalg.det(G) * np.linalg.inv(G).T).T
    check("omega_h matrix = cofactor(G)^T for flat alpha",
          np.allclose(Om, cofT, atol=1e-9),
          f"max diff={np.abs(Om - cofT).max():.2e}")
    check("det omega_h = det(G)^{n-1}",
          abs(np.linalg.det(Om) - np.linalg.det(G) ** (n - 1)) < 1e-6
          * abs(np.linalg.det(G) ** (n - 1)),
          f"det={np.linalg.det(Om).real:.6f}")
    check("alpha = omega flat: omega_h = alpha (trivial instance)",
          np.allclose(form_matrix(xc.star_flat(
              {k: v / 2.0 for k, v in
               xc.power(metric_form(np.eye(n)), n - 1, 1, 1).items()},
              n, n - 1, n - 1)), np.eye(n)))

    # the u-block: star(i ddbar u ^ alpha^{n-2} / (n-1)!) for flat alpha
    Uraw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    U = 0.5 * (Uraw + Uraw.conj().T)
    blk = xc.wedge(metric_form(U), metric_form(np.eye(n)), 1, 1)
    blk = {k: v / 2.0 for k, v in blk.items()}          # /(n-1)! at n=3
    got = form_matrix(xc.star_flat(blk, n, 2, 2))
    want = (np.trace(U) * np.eye(n) - U) / (n - 1)
    check("star(ddbar u ^ alpha^{n-2}/(n-1)!) = [(Lap u) alpha - ddbar u]/(n-1)",
          np.allclose(got, want, atol=1e-10),
          f"max diff={np.abs(got - want).max():.2e}")


def psi_ingestion():
    """psi = (n-1)(log det g_omega - rho) makes the u=0,b=0 residual (n-1) rho
    for flat alpha (so the solve prescribes Ric(omega_u) = Ric(omega) + i ddbar rho)."""
    n = 3
    Graw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    G = Graw @ Graw.conj().T + n * np.eye(n)
    rho = 0.4321
    psi = (n - 1) * (np.log(np.linalg.det(G).real) - rho)
    logdet_h = np.log(np.linalg.det(G).real ** (n - 1))
    residual = logdet_h - psi - 0.0         # log det alpha = 0 for flat alpha
    check("u=0, b=0 residual = (n-1) rho under the psi ingestion rule",
          abs(residual - (n - 1) * rho) < 1e-9,
          f"residual={residual:.10f} (n-1)rho={(n - 1) * rho:.10f}")


def logdet_derivative():
    """d/ds log det(Om + s D)|_0 = tr(Om^{-1} D) — the Newton linearization."""
    n = 3
    Oraw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Om = Oraw @ Oraw.conj().T + n * np.eye(n)
    Draw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    D = 0.5 * (Draw + Draw.conj().T)
    h = 1e-6
    fd = (np.log(np.linalg.det(Om + h * D).real)
          - np.log(np.linalg.det(Om - h * D).real)) / (2 * h)
    ex = np.trace(np.linalg.inv(Om) @ D).real
    check("log det derivative tr(Om^{-1} D) matches central differences",
          abs(fd - ex) < 1e-7, f"fd={fd:.10f} exact={ex:.10f}")


def run():
    conformal_E()
    ricci_conformal()
    trace_identity()
    flat_alpha_chain()
    psi_ingestion()
    logdet_derivative()
    print()
    print("frozen: omega_h = star_a(omega^{n-1}/(n-1)!), det omega_h = "
          "det(g)^{n-1} for flat alpha")
    print("frozen: E u enters with unit coefficient; flat alpha has E = 0 "
          "so the exact-chain tests are unaffected")
    print("frozen: u-block coefficient 1/(n-1) = 0.5 at n = 3")
    return all(results)


if __name__ == "__main__":
    import sys
    sys.exit(0 if run() else 1)
