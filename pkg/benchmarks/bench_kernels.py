"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two workloads that dominate the solvers: applying a layered
rotation/entangler circuit to a state vector, and batches of
Pauli-string expectations.  Run directly:

    python benchmarks/bench_kernels.py --qubits 10 --repeats 5
"""

import argparse
import time

import numpy as np

from qpi._kernels import NUMBA_KERNELS, NUMPY_KERNELS
from qpi.pauli import PauliString


def random_layer_plan(n_qubits, n_gates, rng):
    plan = []
    for _ in range(n_gates):
        kind = rng.integers(3)
        if kind == 0:
            theta = rng.uniform(0, 2 * np.pi)
            c, s = np.cos(theta / 2), np.sin(theta / 2)
            mat = np.array([[c, -s], [s, c]], dtype=complex)
            plan.append(("1q", mat, int(rng.integers(n_qubits))))
        elif kind == 1:
            q0, q1 = rng.choice(n_qubits, size=2, replace=False)
            plan.append(("cz", None, (int(q0), int(q1))))
        else:
            q0, q1 = rng.choice(n_qubits, size=2, replace=False)
            plan.append(("cx", None, (int(q0), int(q1))))
    return plan


def run_circuit(kernels, amps, plan):
    for kind, mat, q in plan:
        if kind == "1q":
            kernels.apply_1q(amps, mat, q)
        elif kind == "cz":
            kernels.apply_cphase(amps, q[0], q[1], -1.0 + 0.0j)
        else:
            kernels.apply_cx(amps, q[0], q[1])
    return amps


def run_expectations(kernels, amps, masks):
    acc = 0.0
    for flip, phasem, iy in masks:
        acc += kernels.expect_pauli(amps, flip, phasem, iy).real
    return acc


def bench(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--qubits", type=int, default=10)
    parser.add_argument("--gates", type=int, default=400)
    parser.add_argument("--paulis", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    dim = 1 << args.qubits
    base = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    base /= np.linalg.norm(base)
    plan = random_layer_plan(args.qubits, args.gates, rng)
    strings = ["".join(rng.choice(list("IXYZ"), size=args.qubits))
               for _ in range(args.paulis)]
    masks = [PauliString(s).masks() for s in strings]

    backends = [("numpy", NUMPY_KERNELS)]
    if NUMBA_KERNELS is not None:
        # trigger JIT compilation outside the timed region
        run_circuit(NUMBA_KERNELS, base.copy(), plan[:3])
        run_expectations(NUMBA_KERNELS, base, masks[:3])
        backends.append(("numba", NUMBA_KERNELS))
    else:
        print("numba unavailable; timing numpy only")

    results = {}
    for name, kernels in backends:
        t_circ = bench(lambda k=kernels: run_circuit(k, base.copy(), plan), args.repeats)
        t_exp = bench(lambda k=kernels: run_expectations(k, base, masks), args.repeats)
        results[name] = (t_circ, t_exp)
        print(f"{name:>6}: circuit {t_circ * 1e3:8.2f} ms   expectations {t_exp * 1e3:8.2f} ms")

    if "numba" in results:
        c_np, e_np = results["numpy"]
        c_nb, e_nb = results["numba"]
        print(f"speedup: circuit x{c_np / c_nb:.1f}, expectations x{e_np / e_nb:.1f}")


if __name__ == "__main__":
    main()
