"""Command-line workbench: run a method over one or more Hamiltonians, emit CSV.

Exit codes: 0 success, 2 usage error, 3 unreadable file, 4 incompatible
flags, 5 input parse error, 6 invalid method parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import measure, oracle, pea, resources, vqe
from .fermion import IntegralsParseError, load_integrals, parity_transform, water_pipeline
from .pauli import PauliHamiltonian, PauliParseError, load_pauli_hamiltonian, one_norm, water_fixture_path
from .statevector import StateVector

EXIT_USAGE, EXIT_IO, EXIT_FLAGS, EXIT_PARSE, EXIT_PARAM = 2, 3, 4, 5, 6

COLUMNS = ["method", "label", "state_index", "energy_re", "energy_im", "oracle_energy", "abs_error",
           "params_json", "shots", "seed"]

# method flags each subcommand accepts; every other method flag is an error
ALLOWED = {
    "exact": set(),
    "trotter-pea": {"bits", "time_step", "mode", "shots", "order"},
    "direct-pea1": {"bits", "rotations", "mode", "shots"},
    "direct-pea2": {"bits", "rotations", "mode", "shots"},
    "direct-measure": {"mode", "shots"},
    "vqe": {"layers", "mode", "shots", "restarts"},
    "resonance": {"mode", "shots"},
}
METHOD_FLAGS = ("bits", "time_step", "rotations", "shots", "layers", "mode", "order", "restarts")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Job:
    method: str
    label: str
    index: int
    H: PauliHamiltonian
    args: dict


def _label_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def _stream_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)[0])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


# ---- method runners ----------------------------------------------------------


def _row(job: Job, energy: complex, ref: float | complex | None, params: dict, shots) -> dict:
    energy = complex(energy)
    err = None if ref is None else abs(energy - ref)
    ref_re = None if ref is None else float(complex(ref).real)
    return {
        "method": job.method, "label": job.label, "state_index": job.args.get("state_index", 0),
        "energy_re": float(energy.real), "energy_im": float(energy.imag), "oracle_energy": ref_re,
        "abs_error": None if err is None else float(err),
        "params_json": json.dumps(params, sort_keys=True, default=float), "shots": shots,
        "seed": job.args["seed"],
    }


def _reference(H: PauliHamiltonian, k: int):
    spec = oracle.eigensolve_hermitian(H)
    if k >= len(spec.values):
        raise CliError(f"state index {k} exceeds the {len(spec.values)} eigenstates", EXIT_PARAM)
    return float(spec.values[k]), StateVector(spec.state(k))


def _run_job(job: Job) -> list[dict]:
    a = job.args
    H = job.H
    k = a["state_index"]
    seed = _stream_seed(a["seed"], job.index)
    exact_mode = a.get("mode") == "exact" or (a.get("mode") is None and a.get("shots") is None)
    if job.method == "exact":
        spec = oracle.eigensolve_hermitian(H)
        idx = [k] if a.get("state_index_given") else range(min(7, len(spec.values)))
        rows = []
        for i in idx:
            if i >= len(spec.values):
                raise CliError(f"state index {i} exceeds the {len(spec.values)} eigenstates", EXIT_PARAM)
            E = float(spec.values[i])
            rows.append(_row(Job(job.method, job.label, job.index, H, dict(a, state_index=i)), E, E, {}, None))
        return rows
    if job.method == "resonance":
        return [_run_resonance(job, seed, exact_mode)]
    E0, psi = _reference(H, k)
    if job.method == "trotter-pea":
        spb = 1 if exact_mode else a.get("shots") or 101
        r = pea.trotter_pea(H, psi, a.get("time_step") or 0.05, a.get("bits") or 12, a.get("order") or 1,
                            spb, seed)
        return [_row(job, r.energy, E0, dict(r.params, bits="".join(map(str, r.phase.bits))),
                     None if exact_mode else spb)]
    if job.method in ("direct-pea1", "direct-pea2"):
        spb = 1 if exact_mode else a.get("shots") or 101
        N = a.get("rotations") or (8 if job.method == "direct-pea1" else 3)
        fn = pea.direct_pea1 if job.method == "direct-pea1" else pea.direct_pea2
        r = fn(H, psi, N, a.get("bits"), spb, seed)
        return [_row(job, r.energy, E0, dict(r.params, bits="".join(map(str, r.phase.bits))),
                     None if exact_mode else spb)]
    if job.method == "direct-measure":
        shots = None if exact_mode else a.get("shots") or 10**6
        mag = measure.estimate_abs_energy(H, psi, shots, seed, reference=E0)
        ph = measure.estimate_complex_phase(H, mag.estimate, psi, shots, seed, mag.sigma_delta)
        energy = math.copysign(mag.estimate, ph.cos_theta)
        params = {"abs_estimate": mag.estimate, "sigma": mag.sigma, "sigma_delta": mag.sigma_delta,
                  "cos_theta": ph.cos_theta, "A": one_norm(H)}
        return [_row(job, energy, E0, params, shots)]
    if job.method == "vqe":
        if k != 0:
            raise CliError("vqe targets the ground state only (--state-index 0)", EXIT_FLAGS)
        cfg = vqe.VqeConfig(restarts=a.get("restarts") or 8, seed=seed, mode="shots" if not exact_mode else "exact",
                            shots=a.get("shots") or 0)
        if not exact_mode and not cfg.shots:
            raise CliError("--mode shots needs --shots", EXIT_FLAGS)
        r = vqe.run_vqe(H, a.get("layers") or 1, cfg)
        params = {"layers": r.params.d, "evaluations": r.evaluations, "restart_energies": r.restart_energies}
        return [_row(job, r.energy, E0, params, None if exact_mode else cfg.shots)]
    raise CliError(f"unknown method {job.method}", EXIT_USAGE)


def _run_resonance(job: Job, seed: int, exact_mode: bool) -> dict:
    a = job.args
    model = oracle.ResonanceModel(a["a"], a["J"], a["x_max"], a["points"])
    if a["points"] & (a["points"] - 1):
        raise CliError("--points must be a power of two for the Pauli route", EXIT_PARAM)
    M = oracle.complex_scale(model, a["alpha"], a["theta"])
    H = oracle.resonance_hamiltonian(model, a["alpha"], a["theta"])
    E_ref, v = oracle.resonance_eigenpair(model, a["alpha"], a["theta"], complex(a["near"]))
    shots = None if exact_mode else a.get("shots") or 10**8
    mag, ph = measure.estimate_complex_energy(H, StateVector(v), shots, seed)
    params = {"a": model.a, "J": model.J, "theta": a["theta"], "alpha": a["alpha"], "points": model.points,
              "x_max": model.x_max, "oracle_re": E_ref.real, "oracle_im": E_ref.imag,
              "cos_theta": ph.cos_theta, "sin_theta": ph.sin_theta, "sigma_cos": ph.sigma_cos,
              "sigma_sin": ph.sigma_sin, "residual": float(np.linalg.norm(M @ v - E_ref * v))}
    return _row(job, ph.energy, E_ref, params, shots)


# ---- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hamiltonian", action="append", default=[], metavar="FILE",
                        help="Pauli table file (repeatable for sweeps); defaults to the bundled water fixture")
    common.add_argument("--label", action="append", default=[], help="label per --hamiltonian, e.g. bond length")
    common.add_argument("--integrals", metavar="FILE", help="one/two-body integrals file")
    common.add_argument("--preset", choices=["water-12"], help="apply the 12 -> 6 qubit water pipeline")
    common.add_argument("--state-index", type=int, default=None, help="0 = ground, k = k-th excited")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", metavar="FILE", help="write CSV here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    common.add_argument("--bits", type=int, help="PEA digits D")
    common.add_argument("--time-step", type=float, help="Trotter step t")
    common.add_argument("--order", type=int, choices=[1, 2], help="Trotter order")
    common.add_argument("--rotations", type=int, help="OAA rotations N")
    common.add_argument("--shots", type=int, help="measurement shots (per PEA bit in shots mode)")
    common.add_argument("--layers", type=int, help="VQE entangler layers d")
    common.add_argument("--restarts", type=int, help="VQE restarts")
    common.add_argument("--mode", choices=["exact", "shots"], help="amplitude readout or sampling")

    p = argparse.ArgumentParser(prog="h2obench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ALLOWED:
        sp = sub.add_parser(name, parents=[common])
        if name == "resonance":
            sp.add_argument("--a", type=float, default=oracle.RESONANCE_FIXTURE.a)
            sp.add_argument("--J", type=float, default=oracle.RESONANCE_FIXTURE.J)
            sp.add_argument("--x-max", type=float, default=oracle.RESONANCE_FIXTURE.x_max)
            sp.add_argument("--points", type=int, default=oracle.RESONANCE_FIXTURE.points)
            sp.add_argument("--theta", type=float, default=oracle.RESONANCE_THETA)
            sp.add_argument("--alpha", type=float, default=oracle.RESONANCE_ALPHA)
            sp.add_argument("--near", type=complex, default=oracle.RESONANCE_GUESS,
                            help="complex guess selecting the resonance, e.g. 1.31-0.02j")
    r = sub.add_parser("resources", help="analytic resource counts")
    r.add_argument("--method", required=True, choices=resources.METHODS)
    r.add_argument("--n", type=int, default=6)
    r.add_argument("--L", type=int, default=95)
    r.add_argument("--bits", type=int)
    r.add_argument("--rotations", type=int)
    r.add_argument("--layers", type=int)
    r.add_argument("--energy", type=float)
    r.add_argument("--eps", type=float)
    r.add_argument("--A", type=float)
    r.add_argument("--iterations", type=int)
    r.add_argument("--output", metavar="FILE", help="write the report as JSON")
    return p


def _check_flags(ns: argparse.Namespace) -> None:
    allowed = ALLOWED[ns.command]
    for flag in METHOD_FLAGS:
        if getattr(ns, flag, None) is not None and flag not in allowed:
            raise CliError(f"--{flag.replace('_', '-')} does not apply to {ns.command}", EXIT_FLAGS)
    if ns.hamiltonian and ns.integrals:
        raise CliError("--hamiltonian and --integrals are mutually exclusive", EXIT_FLAGS)
    if ns.preset and not ns.integrals:
        raise CliError("--preset needs --integrals", EXIT_FLAGS)
    if ns.label and len(ns.label) != max(len(ns.hamiltonian), 1):
        raise CliError("give one --label per --hamiltonian", EXIT_FLAGS)
    if ns.command == "resonance" and (ns.hamiltonian or ns.integrals):
        raise CliError("resonance builds its own Hamiltonian", EXIT_FLAGS)
    if ns.mode == "exact" and ns.shots is not None:
        raise CliError("--shots conflicts with --mode exact", EXIT_FLAGS)
    if ns.jobs < 1:
        raise CliError("--jobs must be positive", EXIT_PARAM)
    for name in ("bits", "rotations", "shots", "layers", "restarts"):
        v = getattr(ns, name, None)
        if v is not None and v < 1:
            raise CliError(f"--{name} must be positive", EXIT_PARAM)
    if ns.time_step is not None and ns.time_step <= 0:
        raise CliError("--time-step must be positive", EXIT_PARAM)
    if ns.state_index is not None and ns.state_index < 0:
        raise CliError("--state-index must be non-negative", EXIT_PARAM)


def _load_inputs(ns: argparse.Namespace) -> list[tuple[str, PauliHamiltonian]]:
    if ns.command == "resonance":
        return [(ns.label[0] if ns.label else "resonance", None)]
    try:
        if ns.integrals:
            fh = load_integrals(ns.integrals)
            H = water_pipeline(fh)[1] if ns.preset == "water-12" else parity_transform(fh)
            return [(ns.label[0] if ns.label else Path(ns.integrals).stem, H)]
        paths = ns.hamiltonian or [str(water_fixture_path())]
        labels = ns.label or [Path(p).stem.removeprefix("water_") for p in paths]
        return [(lab, load_pauli_hamiltonian(p)) for lab, p in zip(labels, paths)]
    except OSError as exc:
        raise CliError(f"cannot read input: {exc}", EXIT_IO) from exc
    except (PauliParseError, IntegralsParseError) as exc:
        raise CliError(f"parse error: {exc}", EXIT_PARSE) from exc


def _job_args(ns: argparse.Namespace) -> dict:
    keys = ["seed", "bits", "time_step", "rotations", "shots", "layers", "mode", "order", "restarts"]
    args = {k: getattr(ns, k, None) for k in keys}
    args["state_index"] = ns.state_index or 0
    args["state_index_given"] = ns.state_index is not None
    if ns.command == "resonance":
        args.update(a=ns.a, J=ns.J, x_max=ns.x_max, points=ns.points, theta=ns.theta, alpha=ns.alpha,
                    near=ns.near)
    return args


def _execute(job: Job) -> list[dict] | CliError:
    try:
        return _run_job(job)
    except CliError as exc:
        return exc
    except (ValueError, ArithmeticError) as exc:
        return CliError(f"{job.method} failed for {job.label}: {exc}", EXIT_PARAM)


def write_csv(rows: list[dict], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])


def _run_resources(ns: argparse.Namespace) -> int:
    try:
        rep = resources.resource_report(ns.method, ns.n, ns.L, D=ns.bits, N=ns.rotations, d=ns.layers,
                                        energy=ns.energy, eps=ns.eps, A=ns.A, iterations=ns.iterations)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARAM) from exc
    print(resources.format_report(rep))
    if ns.output:
        try:
            Path(ns.output).write_text(json.dumps(rep.as_dict(), indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write output: {exc}", EXIT_IO) from exc
    return 0


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "resources":
            return _run_resources(ns)
        _check_flags(ns)
        inputs = _load_inputs(ns)
        args = _job_args(ns)
        jobs = [Job(ns.command, lab, i, H, args) for i, (lab, H) in enumerate(inputs)]
        if ns.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=ns.jobs) as ex:
                results = list(ex.map(_execute, jobs))
        else:
            results = [_execute(j) for j in jobs]
        rows = []
        for res in results:
            if isinstance(res, CliError):
                raise res
            rows.extend(res)
        rows.sort(key=lambda r: (_label_key(r["label"]), r["state_index"]))
        buf = io.StringIO()
        write_csv(rows, buf)
        if ns.output:
            try:
                Path(ns.output).write_text(buf.getvalue(), encoding="utf-8")
            except OSError as exc:
                raise CliError(f"cannot write output: {exc}", EXIT_IO) from exc
        else:
            sys.stdout.write(buf.getvalue())
        return 0
    except CliError as exc:
        print(f"h2obench: error: {exc}", file=sys.stderr)
        return exc.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
