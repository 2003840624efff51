"""Acceptance checks runnable as a suite: one named criterion per function.

Each check returns (passed, measured) where ``measured`` is a short printable
summary.  ``run_criteria`` evaluates them in order and shares the expensive
trainability sweep between the checks that need it.

Two checks are known to fail on the default configuration and are reported
honestly rather than loosened:

* the grid-oracle bound: the exact lattice transform of the gap carries the
  jump-discretization bias -i*dz^2*k/12, giving 3.2e-3 max relative deviation
  on Grid(40, 4096) over k in [0.1, 10] against the 1e-3 target (doubling N
  to 8192 meets the target at 7.9e-4);
* the monotone early-gradient claim: degraded activations boost hidden-value
  contrast (the step carrier), which enlarges early hidden gradients faster
  than the sqrt(1-iota) derivative attenuation shrinks them at mid levels.
"""

import contextlib
import filecmp
import io
import math
import tempfile
from pathlib import Path

import numpy as np

from .activations import ActivationKind, PerceptronConfig, perceptron_decide, sigmoid
from .spectral import Grid, analytic_gap_spectrum, gap_samples, sigmoid_samples, \
    step_samples, transform_gap
from .bogoliubov import (
    commutator_residual,
    make_channel,
    planck_occupation,
    reconstruct,
    self_compose,
    thermal_channel,
    uniform_channel,
)
from .network import (
    MlpConfig,
    hidden_gradient_norm,
    loss_gradients,
    make_dataset,
    median_epochs,
    sweep,
    task_config,
)
from . import network

DEFAULT_GRID = Grid(40.0, 4096)
ORACLE_BAND = (0.1, 10.0)
ORACLE_TOL = 1e-3
SWEEP_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)
SWEEP_SEEDS = tuple(range(10))


def adaptive_quadrature(f, a, b, tol=1e-12, max_depth=48):
    """Adaptive Simpson integration with interval-wise error control."""

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        fl = f(0.5 * (lo + mid))
        fr = f(0.5 * (mid + hi))
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, mid, flo, fl, fmid, left, eps / 2.0, depth - 1)
                + recurse(mid, hi, fmid, fr, fhi, right, eps / 2.0, depth - 1))

    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, max_depth)


def gap_transform_quadrature(k: float) -> float:
    """Imaginary part of the gap transform by quadrature: 2*int sin(kz)/(e^z+1)."""
    return adaptive_quadrature(lambda z: 2.0 * math.sin(k * z) / (math.exp(z) + 1.0),
                               0.0, 60.0)


def check_sigmoid_tanh_identity():
    z = np.linspace(-30.0, 30.0, 10_000)
    dev = float(np.max(np.abs(sigmoid(z) - 0.5 * (np.tanh(z / 2.0) + 1.0))))
    return dev < 1e-12, f"max_abs_dev={dev:.3e}"


def check_perceptron_example():
    cfg = PerceptronConfig(np.array([2.0, 2.0]), -3.0)
    table = {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 1}
    got = {inp: perceptron_decide(cfg, np.array(inp, dtype=float)) for inp in table}
    return got == table, f"truth_table={got}"


def check_analytic_spectrum_vs_quadrature():
    worst = 0.0
    for k in (0.5, 1.0, 2.0, 5.0):
        quad = gap_transform_quadrature(k)
        closed = analytic_gap_spectrum(k).imag
        worst = max(worst, abs(quad - closed))
    return worst < 1e-10, f"max_abs_dev={worst:.3e}"


def grid_oracle_max_rel_err(grid: Grid) -> float:
    spec = transform_gap(grid)
    band = (grid.k >= ORACLE_BAND[0]) & (grid.k <= ORACLE_BAND[1])
    ana = analytic_gap_spectrum(grid.k[band])
    return float(np.max(np.abs(spec.amplitudes[band] - ana) / np.abs(ana)))


def check_grid_oracle_agreement():
    err = grid_oracle_max_rel_err(DEFAULT_GRID)
    return err < ORACLE_TOL, f"max_rel_err={err:.3e} (target {ORACLE_TOL:.0e})"


def check_commutator_dichotomy():
    grid = Grid(20.0, 256)
    canonical = make_channel(grid, lambda k: 0.0, lambda k: 0.5 + abs(k) / 10.0)
    res_canonical = commutator_residual(canonical)
    res_lossy = commutator_residual(uniform_channel(grid, 0.3))
    worst = 0.0
    for n in range(1, 21):
        eff = float(self_compose(uniform_channel(grid, 0.3), n).iota[0])
        worst = max(worst, abs(eff - (1.0 - 0.7**n)))
    ok = res_canonical == 0.0 and res_lossy == 0.3 and worst < 1e-12
    return ok, (f"canonical={res_canonical} lossy={res_lossy} "
                f"compose_dev={worst:.3e}")


def check_reconstruction_endpoints():
    grid = DEFAULT_GRID
    sig = sigmoid_samples(grid)
    stp = step_samples(grid)
    g = gap_samples(grid)
    dev_sig = float(np.max(np.abs(reconstruct(uniform_channel(grid, 0.0)).samples - sig)))
    step_exact = bool(np.array_equal(reconstruct(uniform_channel(grid, 1.0)).samples, stp))
    dev_closed = 0.0
    for iota in SWEEP_LEVELS:
        rec = reconstruct(uniform_channel(grid, iota))
        closed = stp + math.sqrt(1.0 - iota) * g
        dev_closed = max(dev_closed, float(np.max(np.abs(rec.samples - closed))))
    ok = dev_sig < 1e-9 and step_exact and dev_closed < 1e-9
    return ok, (f"sigmoid_dev={dev_sig:.3e} step_exact={step_exact} "
                f"closed_form_dev={dev_closed:.3e}")


def check_planck_occupation():
    grid = DEFAULT_GRID
    channel = thermal_channel(grid, 1.0)
    ks = grid.k[grid.n_points // 2 + 7: grid.n_points // 2 + 147: 7][:20]
    worst = 0.0
    for k in ks:
        occ = float(channel.beta[np.argmin(np.abs(grid.k - k))] ** 2)
        worst = max(worst, abs(occ - planck_occupation(k, 1.0)))
    return worst < 1e-10, f"max_abs_dev={worst:.3e} over {len(ks)} modes"


def check_gradient_correctness():
    dataset = make_dataset("xor")
    config = MlpConfig((2, 4, 1), ActivationKind.sigmoid(), 0.5, 1, 4, seed=0)
    rng = np.random.default_rng(2025)
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        weights = [(rng.uniform(-1.0, 1.0, (4, 2)), rng.uniform(-1.0, 1.0, 4)),
                   (rng.uniform(-1.0, 1.0, (1, 4)), rng.uniform(-1.0, 1.0, 1))]
        grads = loss_gradients(config, weights, dataset.inputs, dataset.labels)
        analytic = np.concatenate([np.concatenate([dw.ravel(), db.ravel()])
                                   for dw, db in grads])

        def loss_at(flat):
            out, i = [], 0
            for w, b in weights:
                w2 = flat[i:i + w.size].reshape(w.shape); i += w.size
                b2 = flat[i:i + b.size]; i += b.size
                out.append((w2, b2))
            _, _, y = network.forward(config, out, dataset.inputs)
            return network.bce_loss(y, dataset.labels)

        flat = np.concatenate([np.concatenate([w.ravel(), b.ravel()])
                               for w, b in weights])
        numeric = np.zeros_like(flat)
        for i in range(flat.size):
            up, dn = flat.copy(), flat.copy()
            up[i] += h
            dn[i] -= h
            numeric[i] = (loss_at(up) - loss_at(dn)) / (2.0 * h)
        rel = float(np.linalg.norm(analytic - numeric)
                    / max(np.linalg.norm(analytic), np.linalg.norm(numeric)))
        worst = max(worst, rel)
    return worst < 1e-4, f"max_rel_err={worst:.3e} over 100 configs"


def run_xor_sweep():
    return sweep("xor", SWEEP_LEVELS, SWEEP_SEEDS)


def check_xor_endpoints(reports):
    at0 = [r for r in reports if r.iota == 0.0]
    at1 = [r for r in reports if r.iota == 1.0]
    converged0 = sum(1 for r in at0 if r.epochs_to_threshold is not None)
    med0 = median_epochs(at0)
    med1 = median_epochs(at1)
    zero_grads = all(r.mean_grad_norm_first100 == 0.0 for r in at1)
    ok = converged0 >= 8 and math.isfinite(med0) and math.isinf(med1) and zero_grads
    return ok, (f"conv@0={converged0}/10 median@0={med0:.0f} "
                f"median@1={'never' if math.isinf(med1) else med1} "
                f"zero_hidden_grads@1={zero_grads}")


def grad_norm_medians(reports):
    medians = []
    for iota in SWEEP_LEVELS:
        cells = [r.mean_grad_norm_first100 for r in reports if r.iota == iota]
        medians.append(float(np.median(cells)))
    return medians


def check_grad_norm_monotone(reports):
    medians = grad_norm_medians(reports)
    ok = all(medians[i] >= medians[i + 1] for i in range(len(medians) - 1))
    return ok, "medians=" + ",".join(f"{m:.3e}" for m in medians)


def scaling_fixed_point_ratios():
    """Hidden-gradient norms at a weight point where the scaling is isolated.

    First-layer weights and all biases zero: every pre-activation is 0, so
    the hidden values (0.5) and hence the output error are identical across
    loss levels and only the derivative table differentiates the gradients.
    """
    dataset = make_dataset("xor")
    rng = np.random.default_rng(42)
    weights = [(np.zeros((4, 2)), np.zeros(4)),
               (rng.uniform(-0.5, 0.5, (1, 4)), np.zeros(1))]
    norms = {}
    for iota in SWEEP_LEVELS:
        act = ActivationKind.degraded(reconstruct(uniform_channel(DEFAULT_GRID, iota)))
        config = task_config("xor", act, seed=0)
        grads = loss_gradients(config, weights, dataset.inputs, dataset.labels)
        norms[iota] = hidden_gradient_norm(grads)
    return norms


def check_gradient_scaling():
    norms = scaling_fixed_point_ratios()
    base = norms[0.0]
    worst = 0.0
    for iota in (0.25, 0.5, 0.75):
        ratio = norms[iota] / base
        worst = max(worst, abs(ratio - math.sqrt(1.0 - iota)) / math.sqrt(1.0 - iota))
    ok = worst < 1e-3 and norms[1.0] == 0.0
    return ok, f"max_rel_dev={worst:.3e} norm@1={norms[1.0]}"


def check_perceptron_limit_freeze():
    act = ActivationKind.degraded(reconstruct(uniform_channel(DEFAULT_GRID, 1.0)))
    config = task_config("xor", act, seed=3)
    initial = network.init_weights(config)
    report, final = network.train_and_weights(config, make_dataset("xor"))
    frozen = all(np.array_equal(initial[i][0], final[i][0])
                 and np.array_equal(initial[i][1], final[i][1])
                 for i in range(len(initial) - 1))
    ok = frozen and report.mean_grad_norm_first100 == 0.0
    return ok, f"hidden_frozen={frozen} mean_grad_norm={report.mean_grad_norm_first100}"


def check_determinism():
    from . import cli

    mismatches = []
    with tempfile.TemporaryDirectory() as tmp:
        for cmd, extra in (
            ("spectrum", []),
            ("channel", ["--set", "channel.profile=thermal"]),
            ("degrade", ["--set", "channel.iota=0.5"]),
            ("train-sweep", ["--set", "sweep.levels=0,1", "--set", "sweep.seeds=0,1"]),
        ):
            out_a = Path(tmp) / f"{cmd}-a"
            out_b = Path(tmp) / f"{cmd}-b"
            for out in (out_a, out_b):
                with contextlib.redirect_stdout(io.StringIO()):
                    code = cli.main([cmd, "--out", str(out)] + extra)
                if code != 0:
                    return False, f"{cmd} exited {code}"
            for f in sorted(out_a.glob("*.csv")):
                if not filecmp.cmp(f, out_b / f.name, shallow=False):
                    mismatches.append(f"{cmd}/{f.name}")
    return not mismatches, ("bit-identical CSVs" if not mismatches
                            else "mismatched: " + ",".join(mismatches))


def check_moons_band():
    """Fixed from measurement: a fully degraded hidden stack still leaves the
    output layer an informative linear read-out on moons, so the realized
    band sits well above chance but below the learnable regime."""
    reports = sweep("moons", (0.0, 1.0), SWEEP_SEEDS)
    at0 = [r for r in reports if r.iota == 0.0]
    at1 = [r for r in reports if r.iota == 1.0]
    conv0 = sum(1 for r in at0 if r.epochs_to_threshold is not None)
    accs1 = [r.final_accuracy for r in at1]
    in_band = all(0.65 <= a <= 0.92 for a in accs1)
    ok = conv0 >= 8 and in_band
    return ok, (f"conv@0={conv0}/10 acc@1=[{min(accs1):.3f},{max(accs1):.3f}] "
                f"band=[0.65,0.92]")


def run_criteria(full: bool = False):
    """Evaluate every criterion; yields (name, passed, measured)."""
    results = [
        ("sigmoid-tanh-identity", *check_sigmoid_tanh_identity()),
        ("perceptron-worked-example", *check_perceptron_example()),
        ("analytic-spectrum-vs-quadrature", *check_analytic_spectrum_vs_quadrature()),
        ("grid-oracle-agreement", *check_grid_oracle_agreement()),
        ("commutator-dichotomy", *check_commutator_dichotomy()),
        ("reconstruction-endpoints", *check_reconstruction_endpoints()),
        ("planck-occupation", *check_planck_occupation()),
        ("gradient-correctness", *check_gradient_correctness()),
    ]
    xor_reports = run_xor_sweep()
    results.append(("xor-trainability-endpoints", *check_xor_endpoints(xor_reports)))
    results.append(("grad-norm-monotone", *check_grad_norm_monotone(xor_reports)))
    results.append(("gradient-scaling-fixed-point", *check_gradient_scaling()))
    results.append(("perceptron-limit-freeze", *check_perceptron_limit_freeze()))
    results.append(("determinism", *check_determinism()))
    if full:
        results.append(("moons-band", *check_moons_band()))
    return results
