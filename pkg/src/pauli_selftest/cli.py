"""Command-line driver: ``pauli-selftest <command> [options]``.

Exit status is 0 when every verdict passes, 1 on a failed verdict, 2 on a
usage or input error and 3 when the circuit would exceed the qubit cap.
"""

import sys
import time
from dataclasses import asdict, dataclass

import click
import numpy as np

from . import parallel, qubit, robustness, swap
from .certification import (certification_value, decompose_witness, ideal_network,
                            isotropic_witness, separable_minimum)
from .io import WitnessFormatError, WitnessValidationError, emit_report, load_witness
from .objects import isotropic_state, parallel_strategy, transpose_strategy

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    command: str
    n: int = 1
    epsilon: float = 0.0
    eta: float = 1.0
    p: float = 0.6
    witness_file: str = None
    seed: int = 42
    out_format: str = "json"
    out_path: str = None
    transpose: str = "none"
    samples: int = 10_000
    eta_min: float = 0.0
    eta_max: float = 1.0
    steps: int = 50


@dataclass
class RunReport:
    config: dict
    metrics: dict
    verdicts: dict
    wall_time: float = None

    @property
    def passed(self):
        return all(self.verdicts.values())

    def to_dict(self, timing=False):
        out = {"config": self.config, "metrics": self.metrics,
               "verdicts": self.verdicts, "passed": self.passed}
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _floats(values):
    return [float(v) for v in values]


def _selftest(cfg):
    s, sos = robustness.noisy_qubit_selftest(cfg.epsilon)
    if cfg.transpose == "all":
        s = transpose_strategy(s)
        sos = qubit.sos_residuals(s)
    eps = max(sos.epsilon, 0.0)
    anti = qubit.anticommutator_norms(s)
    bounds = robustness.anticommutator_bounds(eps)
    with np.errstate(all="ignore"):
        out, junk, fid = qubit.swap_isometry(s, epsilon=np.inf)
    actions = qubit.pauli_action_residuals(s)
    distance = actions["I"]
    metrics = {
        "bell_value": sos.bell_value,
        "epsilon": eps,
        "sos_residuals": _floats(sos.residuals),
        "anticommutator_norms": _floats(anti),
        "anticommutator_bounds": _floats(bounds),
        "extracted_fidelity": fid,
        "junk_weights": junk.weights,
        "junk_off_diagonal": junk.off_diagonal,
        "state_distance": distance,
        "state_distance_bound": robustness.state_distance_bound(eps),
        "action_residuals": actions,
    }
    verdicts = {
        "sos_squares_sum_to_twice_deficit":
            abs(sum(r ** 2 for r in sos.residuals) - 2 * sos.epsilon) <= 1e-8,
        "anticommutator_bounds": all(a <= b + 1e-12 for a, b in zip(anti, bounds)),
        "isometry_preserves_norm": abs(np.linalg.norm(out) - 1) <= 1e-10,
        "state_distance_bound": distance <= robustness.state_distance_bound(eps) + 1e-9,
    }
    if cfg.epsilon == 0:
        verdicts["maximal_violation"] = abs(eps) <= 1e-10
        verdicts["extracted_fidelity_one"] = abs(fid - 1) <= 1e-10
        verdicts["pauli_actions"] = all(
            v <= 1e-9 for k, v in actions.items() if k != "Y_uncontrolled")
    return metrics, verdicts


def _sites(spec, n):
    if spec in ("none", ""):
        return ()
    if spec == "all":
        return tuple(range(n))
    try:
        sites = tuple(int(t) - 1 for t in spec.split(","))
    except ValueError:
        raise click.BadParameter(f"expected 'none', 'all' or site numbers, got {spec!r}")
    if any(not 0 <= i < n for i in sites):
        raise click.BadParameter(f"site numbers must lie in 1..{n}")
    return sites


def _parallel(cfg):
    n = cfg.n
    s = parallel_strategy(n, transposed_sites=_sites(cfg.transpose, n))
    bell = parallel.parallel_bell_values(s, n)
    junk = parallel.parallel_swap_isometry(s, n)
    metrics = {
        "bell_values": _floats(bell),
        "site_fidelities": _floats(junk.site_fidelities),
        "junk_weights": junk.weights,
        "junk_off_diagonal": junk.off_diagonal,
    }
    verdicts = {
        "maximal_violation_every_site":
            all(abs(b - qubit.MAX_BELL_VALUE) <= 1e-10 for b in bell),
        "junk_off_diagonal_vanishes": junk.off_diagonal <= 1e-9,
        "site_fidelities_one": all(abs(f - 1) <= 1e-9 for f in junk.site_fidelities),
        "junk_normalized": abs(junk.total_weight - 1) <= 1e-9,
    }
    if n >= 2:
        rep = parallel.verify_junk_branches(s, n)
        metrics["bsm_max_deviation"] = rep["bsm_deviation"]
        metrics["two_term_residual"] = rep["two_term_residual"]
        metrics["bsm_identity_residuals"] = [_floats(r) for r in
                                           parallel.bsm_identity_residuals(s, n)]
        verdicts["bsm_table_matches"] = rep["bsm_deviation"] <= 1e-10
        verdicts["junk_two_branches"] = bool(rep["aligned"])
    return metrics, verdicts


def _certify(cfg):
    n, d = cfg.n, 2 ** cfg.n
    if cfg.witness_file:
        wit = load_witness(cfg.witness_file)
        if wit.n != n:
            raise click.BadParameter(f"witness file is for n={wit.n}, not n={n}")
    else:
        wit = decompose_witness(isotropic_witness(n), n)
    target = isotropic_state(cfg.p, d)
    ns = ideal_network(target, n, visibility=cfg.eta)
    value = certification_value(ns, wit)
    bell_ca = parallel.parallel_bell_values(ns.charlie_alice(), n)
    bell_db = parallel.parallel_bell_values(ns.daisy_bob(), n)
    metrics = {
        "I": value,
        "witness_value_over_d4": float(np.trace(wit.matrix @ target).real) / d ** 4,
        "witness_l1_norm": wit.l1_norm,
        "bell_values_charlie_alice": _floats(bell_ca),
        "bell_values_daisy_bob": _floats(bell_db),
    }
    verdicts = {
        "selftest_charlie_alice":
            all(abs(b - qubit.MAX_BELL_VALUE) <= 1e-9 for b in bell_ca),
        "selftest_daisy_bob": all(abs(b - qubit.MAX_BELL_VALUE) <= 1e-9 for b in bell_db),
    }
    if n == 1:
        metrics["expected_I_werner"] = robustness.expected_I_werner(cfg.eta, cfg.p)
    if n >= 2:
        dev = max(parallel.bsm_correlations(ns.charlie_alice(), n).max_deviation,
                  parallel.bsm_correlations(ns.daisy_bob(), n).max_deviation)
        metrics["bsm_max_deviation"] = dev
        verdicts["bsm_table_matches"] = dev <= 1e-9
    if cfg.samples > 0:
        search = separable_minimum(wit, ns, samples=cfg.samples, seed=cfg.seed)
        metrics["separable_minimum"] = search.min_value
        verdicts["separable_baseline_nonnegative"] = search.min_value >= -1e-7
    verdicts["entanglement_certified"] = value < 0
    return metrics, verdicts


def _curve(cfg):
    grid = np.linspace(cfg.eta_min, cfg.eta_max, cfg.steps)
    points = robustness.robustness_curve(cfg.p, grid)
    metrics = {"points": [asdict(pt) for pt in points]}
    consistent = all(
        (pt.theta_crit == 0) if pt.expected_I >= 0 else
        abs(pt.expected_I + robustness.worst_case_I_penalty(pt.theta_crit)) <= 1e-12
        for pt in points)
    return metrics, {"theta_crit_solves_threshold": consistent}, points


def _check_ranges(cfg):
    if not 1 <= cfg.n <= 4:
        raise click.BadParameter("--n must lie in 1..4")
    for name in ("eta", "p", "eta_min", "eta_max"):
        if not 0.0 <= getattr(cfg, name) <= 1.0:
            raise click.BadParameter(f"--{name.replace('_', '-')} must lie in [0, 1]")
    if not 0.0 <= cfg.epsilon <= qubit.MAX_BELL_VALUE:
        raise click.BadParameter("--epsilon must lie in [0, 6 sqrt2]")
    if cfg.steps < 1 or cfg.samples < 0:
        raise click.BadParameter("--steps must be positive and --samples non-negative")


def run(cfg):
    """Execute one experiment and return ``(RunReport, extra_text)``;
    ``extra_text`` is the CSV curve for ``robust-curve`` in CSV format."""
    _check_ranges(cfg)
    start = time.perf_counter()
    extra = None
    if cfg.command == "selftest":
        metrics, verdicts = _selftest(cfg)
    elif cfg.command == "parallel-selftest":
        metrics, verdicts = _parallel(cfg)
    elif cfg.command == "certify":
        metrics, verdicts = _certify(cfg)
    elif cfg.command == "robust-curve":
        metrics, verdicts, points = _curve(cfg)
        if cfg.out_format == "csv":
            extra = robustness.curve_to_csv(points)
    else:
        raise click.BadParameter(f"unknown command {cfg.command!r}")
    report = RunReport(asdict(cfg), metrics, verdicts, time.perf_counter() - start)
    return report, extra


def _execute(cfg, timing):
    try:
        report, extra = run(cfg)
    except swap.ResourceCapExceeded as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(EXIT_CAP)
    except (WitnessFormatError, WitnessValidationError, OSError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(EXIT_USAGE)
    except click.BadParameter as err:
        click.echo(f"error: {err.format_message()}", err=True)
        sys.exit(EXIT_USAGE)
    data = report.to_dict(timing)
    if extra is not None:
        text = extra
        if cfg.out_path:
            with open(cfg.out_path, "w") as fh:
                fh.write(text)
    else:
        text = emit_report(data, cfg.out_format, cfg.out_path)
    if not cfg.out_path:
        click.echo(text, nl=False)
    sys.exit(EXIT_OK if report.passed else EXIT_VERDICT)


def _common(fn):
    options = [
        click.option("--seed", type=int, default=42, show_default=True),
        click.option("--format", "out_format", type=click.Choice(["json", "csv"]),
                     default="json", show_default=True),
        click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                     help="Write the report here instead of stdout."),
        click.option("--timing", is_flag=True, help="Include wall time in the report."),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


@click.group(context_settings={"help_option_names": ["--help"]})
def main():
    """Self-testing and network entanglement certification experiments."""


@main.command()
@click.option("--epsilon", type=float, default=0.0, show_default=True,
              help="Bell-value deficit realized with Werner noise.")
@click.option("--transpose", type=click.Choice(["none", "all"]), default="none",
              show_default=True)
@_common
def selftest(epsilon, transpose, seed, out_format, out_path, timing):
    """Single-copy triple CHSH self-test and swap isometry."""
    _execute(ExperimentConfig("selftest", epsilon=epsilon, transpose=transpose, seed=seed,
                              out_format=out_format, out_path=out_path), timing)


@main.command("parallel-selftest")
@click.option("--n", type=int, default=1, show_default=True)
@click.option("--transpose", default="none", show_default=True,
              help="'none', 'all' or comma-separated copies (1-based) using -sigma_y.")
@_common
def parallel_selftest(n, transpose, seed, out_format, out_path, timing):
    """Self-test of n parallel copies with the alignment table."""
    _execute(ExperimentConfig("parallel-selftest", n=n, transpose=transpose, seed=seed,
                              out_format=out_format, out_path=out_path), timing)


@main.command()
@click.option("--n", type=int, default=1, show_default=True)
@click.option("--p", type=float, default=0.6, show_default=True,
              help="Weight of Phi+ in the isotropic target state.")
@click.option("--eta", type=float, default=1.0, show_default=True,
              help="Visibility of the auxiliary states.")
@click.option("--witness-file", type=click.Path(dir_okay=False), default=None)
@click.option("--samples", type=int, default=10_000, show_default=True,
              help="Product states sampled for the separable baseline (0 skips it).")
@_common
def certify(n, p, eta, witness_file, samples, seed, out_format, out_path, timing):
    """Evaluate the certification functional on the simulated network."""
    _execute(ExperimentConfig("certify", n=n, p=p, eta=eta, witness_file=witness_file,
                              samples=samples, seed=seed, out_format=out_format,
                              out_path=out_path), timing)


@main.command("robust-curve")
@click.option("--p", type=float, default=0.6, show_default=True)
@click.option("--eta-min", type=float, default=0.0, show_default=True)
@click.option("--eta-max", type=float, default=1.0, show_default=True)
@click.option("--steps", type=int, default=50, show_default=True)
@_common
def robust_curve(p, eta_min, eta_max, steps, seed, out_format, out_path, timing):
    """Critical robustness radius against auxiliary visibility."""
    _execute(ExperimentConfig("robust-curve", p=p, eta_min=eta_min, eta_max=eta_max,
                              steps=steps, seed=seed, out_format=out_format,
                              out_path=out_path), timing)


if __name__ == "__main__":
    main()
