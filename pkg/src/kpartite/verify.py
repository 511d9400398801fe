"""Self-check suites behind ``kpartite verify``.

Each suite returns a :class:`SuiteReport`; a suite passes when it records no
failures. All randomness flows from the seed.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines, criteria, ensembles, observables, twocopy
from .criteria import ElementFiducial
from .qstate import local_vector
from .twocopy import SwapFiducial

SUITES = ("oracle", "soundness", "recovery", "observables")

ORACLE_TOL = 1e-10
RECOVERY_TOL = 1e-10
IDENTITY_TOL = 1e-12
EXPECTATION_TOL = 1e-11


@dataclass
class SuiteReport:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, message: str) -> None:
        self.checks += 1
        if not ok:
            self.failures.append(message)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.checks} checks, {len(self.failures)} failures, "
                f"{self.seconds:.2f}s")


def _random_local_fiducial(dims, rng) -> SwapFiducial:
    xs = tuple(local_vector(ensembles.haar_vector(d, rng)) for d in dims)
    ys = tuple(local_vector(ensembles.haar_vector(d, rng)) for d in dims)
    return SwapFiducial(xs, ys)


def oracle_suite(seed: int = 0, samples: int = 100, n_qubits: int = 3) -> SuiteReport:
    """Reduced two-copy values against the explicit ``rho (x) rho`` oracle."""
    report = SuiteReport("oracle")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    for dims in [(2,) * n_qubits, (3, 3)]:
        n = len(dims)
        labels = list(itertools.product(*[range(d) for d in dims]))
        masks = list(twocopy.enumerate_proper_subsets(n))
        for sample in range(samples):
            rho = ensembles.random_density(dims, rng)
            oracle = twocopy.TwoCopyOracle(rho)
            fids = [SwapFiducial(x, y) for x, y in itertools.product(labels, labels)]
            fids.append(_random_local_fiducial(dims, rng))
            for fid in fids:
                got = twocopy.swap_expectation(rho, fid)
                want = oracle.value(fid)
                report.check(abs(got - want) <= ORACLE_TOL,
                             f"dims={dims} sample={sample} P: {got!r} vs {want!r}")
                for mask in masks:
                    got = twocopy.partial_swap_expectation(rho, fid, mask)
                    want = oracle.value(fid, mask)
                    report.check(abs(got - want) <= ORACLE_TOL,
                                 f"dims={dims} sample={sample} mask={mask:#b}: {got!r} vs {want!r}")
    report.seconds = time.perf_counter() - start
    return report


SOUNDNESS_CASES = ((4, 2), (4, 3), (5, 2))


def _random_element_fiducial(dims, rng) -> ElementFiducial:
    d = dims[0]
    base = tuple(int(x) for x in rng.integers(0, d, size=len(dims)))
    size = int(rng.integers(1, d + 1))
    omega = tuple(int(s) for s in rng.choice(d, size=size, replace=False))
    return ElementFiducial(base, omega)


def _random_basis_fiducial(dims, rng) -> SwapFiducial:
    return SwapFiducial(tuple(int(rng.integers(0, d)) for d in dims),
                        tuple(int(rng.integers(0, d)) for d in dims))


def soundness_suite(seed: int = 0, samples: int = 500, max_components: int = 6) -> SuiteReport:
    """No producibility violations on k-producible ensembles, no separability violations on k-separable ones."""
    report = SuiteReport("soundness")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    for n, k in SOUNDNESS_CASES:
        dims = (2,) * n
        for mode, swap_fn, elem_fn in (
            (ensembles.MAX_PART_SIZE, criteria.swap_producibility, criteria.element_producibility),
            (ensembles.EXACTLY_K_PARTS, criteria.swap_separability, criteria.element_separability),
        ):
            for sample in range(samples):
                m = int(rng.integers(1, max_components + 1))
                rho = ensembles.random_mixed(dims, mode, k, m, rng)
                tag = f"N={n} k={k} {mode} sample={sample}"
                for fid in (SwapFiducial((0,) * n, (1,) * n),
                            _random_basis_fiducial(dims, rng),
                            _random_local_fiducial(dims, rng)):
                    v = swap_fn(rho, fid, k)
                    report.check(not v.violated, f"{tag} {v.criterion}: margin {v.margin:.3e}")
                for fid in (ElementFiducial((0,) * n, (1,)), _random_element_fiducial(dims, rng)):
                    v = elem_fn(rho, fid, k)
                    report.check(not v.violated, f"{tag} {v.criterion}: margin {v.margin:.3e}")
    report.seconds = time.perf_counter() - start
    return report


def recovery_suite(seed: int = 0, samples: int = 200) -> SuiteReport:
    """Swap and element separability with the corner fiducials against the index-formula baselines."""
    report = SuiteReport("recovery")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    for dims in [(2, 2, 2), (3, 3), (3, 3, 3)]:
        n, d = len(dims), dims[0]
        swap = SwapFiducial((0,) * n, (d - 1,) * n)
        elem = ElementFiducial((0,) * n, tuple(range(1, d)))
        for sample in range(samples):
            rho = ensembles.random_density(dims, rng)
            pairs = [(criteria.swap_separability(rho, swap, k), baselines.antidiagonal_separability(rho, k))
                     for k in range(2, n + 1)]
            pairs += [(criteria.element_separability(rho, elem, k), baselines.single_excitation_separability(rho, k))
                      for k in range(2, n)]
            for ours, ref in pairs:
                ok = abs(ours.lhs - ref.lhs) <= RECOVERY_TOL and abs(ours.rhs - ref.rhs) <= RECOVERY_TOL
                report.check(ok, f"dims={dims} sample={sample} {ours.criterion} k={ours.k}: "
                                 f"({ours.lhs!r}, {ours.rhs!r}) vs ({ref.lhs!r}, {ref.rhs!r})")
    report.seconds = time.perf_counter() - start
    return report


def _orthogonal_pair(d: int, rng) -> tuple[np.ndarray, np.ndarray]:
    q, _ = np.linalg.qr(ensembles.haar_vector(d * d, rng).reshape(d, d))
    return q[:, 0], q[:, 1]


def observables_suite(seed: int = 0, samples: int = 100) -> SuiteReport:
    """Alternating-sum identities and expectation identities for the local observables."""
    report = SuiteReport("observables")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    for n in (2, 3, 4):
        dims = (2,) * n
        pairs = [_orthogonal_pair(2, rng) for _ in range(n)]
        fids = [SwapFiducial((0,) * n, (1,) * n),
                SwapFiducial(tuple(a for a, _ in pairs), tuple(b for _, b in pairs))]
        for fid in fids:
            obs = observables.build_swap_observables(fid, dims)
            res = np.max(np.abs(observables.alternating_sum(obs.M_l) - n * obs.M))
            report.check(res < IDENTITY_TOL, f"N={n} sum (-1)^l M_l residual {res:.3e}")
            res = np.max(np.abs(observables.alternating_sum(obs.M_tilde_l) - n * obs.M_tilde))
            report.check(res < IDENTITY_TOL, f"N={n} sum (-1)^l M~_l residual {res:.3e}")
            for _ in range(samples // 10):
                rho = ensembles.random_density(dims, rng)
                z = rho.element(fid.phi1, fid.phi2)
                m = np.trace(rho.matrix @ obs.M)
                mt = np.trace(rho.matrix @ obs.M_tilde)
                report.check(abs(m - 2 * z.real) < EXPECTATION_TOL, f"N={n} <M> mismatch")
                report.check(abs(mt + 2 * z.imag) < EXPECTATION_TOL, f"N={n} <M~> mismatch")
        elem = ElementFiducial((0,) * n, (1,))
        for i, j in itertools.permutations(range(n), 2):
            obs = observables.build_element_observables(elem, i, j, 1, 1, dims)
            rho = ensembles.random_density(dims, rng)
            bra = tuple(1 if s == i else 0 for s in range(n))
            ket = tuple(1 if s == j else 0 for s in range(n))
            z = rho.element(bra, ket)
            m = np.trace(rho.matrix @ obs.M)
            mt = np.trace(rho.matrix @ obs.M_tilde)
            report.check(abs(m - 4 * z.real) < EXPECTATION_TOL, f"N={n} ({i},{j}) <M^st_ij> mismatch")
            report.check(abs(mt + 4 * z.imag) < EXPECTATION_TOL, f"N={n} ({i},{j}) <M~^st_ij> mismatch")
    report.seconds = time.perf_counter() - start
    return report


def run_suites(names, seed: int = 0, samples: int | None = None, n_qubits: int = 3) -> list[SuiteReport]:
    out = []
    for name in names:
        kw = {} if samples is None else {"samples": samples}
        if name == "oracle":
            out.append(oracle_suite(seed, n_qubits=n_qubits, **kw))
        elif name == "soundness":
            out.append(soundness_suite(seed, **kw))
        elif name == "recovery":
            out.append(recovery_suite(seed, **kw))
        elif name == "observables":
            out.append(observables_suite(seed, **kw))
        else:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return out
