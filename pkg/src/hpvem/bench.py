"""Benchmark harness: test cases, convergence studies, rate fits, reports."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry as geo
from .assembly import DIRICHLET, NEUMANN, BoundaryCondition, CoefficientField, assemble
from .degrees import DegreeMap, assign_hp, assign_uniform, edge_degrees_from_cells
from .eigensolve import SolverConfig, match_eigenvalues, solve_generalized
from .local import DRECIPE, StabChoice

DATA_DIR = Path(__file__).parent / "data"

CASES = ("tc1_square_laplace", "tc2_oscillator", "tc3_lshape", "tc4_checkerboard")


class FitError(ValueError):
    """Not enough usable records for a rate fit."""


class StudyError(Exception):
    """A study stage failed; carries the records completed so far."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


@dataclass(frozen=True)
class TestCase:
    """One benchmark problem: domain, coefficients, boundary condition."""

    case_id: str
    domain: str
    rect: tuple | None
    coeffs: CoefficientField | None
    bc: BoundaryCondition
    reference_source: str
    eps: float | None = None


def get_test_case(case_id, eps=2.0):
    if case_id == "tc1_square_laplace":
        return TestCase(case_id, "unit_square", (0.0, 1.0, 0.0, 1.0), None,
                        BoundaryCondition(DIRICHLET), "analytic_formula")
    if case_id == "tc2_oscillator":
        coeffs = CoefficientField(diffusion=0.5,
                                  potential=lambda x, y: 0.5 * (x ** 2 + y ** 2))
        return TestCase(case_id, "oscillator_box", (-10.0, 10.0, -10.0, 10.0), coeffs,
                        BoundaryCondition(DIRICHLET), "oscillator_formula")
    if case_id == "tc3_lshape":
        return TestCase(case_id, "lshape", None, None,
                        BoundaryCondition(NEUMANN), "external_data_file")
    if case_id == "tc4_checkerboard":
        eps = float(eps)
        coeffs = CoefficientField(
            diffusion=lambda x, y, _e=eps: np.where(x * y > 0, _e, 1.0))
        return TestCase(case_id, "checkerboard", (-1.0, 1.0, -1.0, 1.0), coeffs,
                        BoundaryCondition(NEUMANN), "external_data_file", eps=eps)
    raise ValueError(f"unknown test case: {case_id!r}")


# ---------------------------------------------------------------------------
# reference spectra


@dataclass(frozen=True)
class ReferenceSpectrum:
    values: np.ndarray
    multiplicities: np.ndarray
    provenance: str

    def __post_init__(self):
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("reference values must be strictly ascending")
        if np.any(self.multiplicities < 1):
            raise ValueError("multiplicities must be >= 1")


def _square_dirichlet_spectrum(k_max):
    # (k1^2 + k2^2) pi^2 for k1, k2 >= 1; k range wide enough for any sane k_max
    kk = max(8, int(np.ceil(np.sqrt(2 * k_max))) + 4)
    counts = {}
    for k1 in range(1, kk + 1):
        for k2 in range(1, kk + 1):
            counts[k1 ** 2 + k2 ** 2] = counts.get(k1 ** 2 + k2 ** 2, 0) + 1
    distinct = sorted(counts)[:k_max]
    return (np.array(distinct, dtype=float) * np.pi ** 2,
            np.array([counts[v] for v in distinct], dtype=np.intp))


def default_ref_file(case_id, eps=None):
    if case_id == "tc3_lshape":
        return DATA_DIR / "lshape_neumann.txt"
    if case_id == "tc4_checkerboard":
        tag = "1e8" if eps is not None and eps > 100 else "2"
        return DATA_DIR / f"checkerboard_eps{tag}.txt"
    return None


def read_reference_file(path):
    values = []
    mults = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            values.append(float(parts[0]))
            mults.append(int(parts[1]) if len(parts) > 1 else 1)
    return ReferenceSpectrum(np.array(values), np.array(mults, dtype=np.intp),
                             "external_data_file")


def reference_spectrum(case_id, k_max, eps=2.0, ref_file=None):
    """First `k_max` distinct reference eigenvalues with multiplicities."""
    if case_id == "tc1_square_laplace":
        vals, mults = _square_dirichlet_spectrum(k_max)
        return ReferenceSpectrum(vals, mults, "analytic_formula")
    if case_id == "tc2_oscillator":
        vals = np.arange(1, k_max + 1, dtype=float)
        return ReferenceSpectrum(vals, np.arange(1, k_max + 1, dtype=np.intp),
                                 "oscillator_formula")
    if case_id in ("tc3_lshape", "tc4_checkerboard"):
        path = Path(ref_file) if ref_file else default_ref_file(case_id, eps)
        if not path.is_file():
            raise FileNotFoundError(f"reference data file not found: {path}")
        spec = read_reference_file(path)
        if len(spec.values) < k_max:
            raise ValueError(f"reference file {path} holds only {len(spec.values)} values")
        return ReferenceSpectrum(spec.values[:k_max], spec.multiplicities[:k_max],
                                 spec.provenance)
    raise ValueError(f"unknown test case: {case_id!r}")


def generate_reference_file(case_id, out_path, eps=2.0, n_layers=20, degree_cap=10,
                            n_values=8, cluster_rel_tol=1e-6):
    """Recompute and freeze a reference spectrum for tc3/tc4.

    Deep geometric grading removes the corner error while the degree cap keeps
    the element Gram matrices well conditioned; the smooth part is resolved at
    the cap. Values are clustered into distinct eigenvalues with
    multiplicities and written with a provenance header.
    """
    case = get_test_case(case_id, eps=eps)
    if case.reference_source != "external_data_file":
        raise ValueError(f"{case_id} has an analytic reference")
    kind = "Lshape" if case_id == "tc3_lshape" else "square_checkerboard"
    layered = geo.generate_graded(kind, n_layers, 0.5)
    cd = np.minimum(layered.layer_of_cell + 1, degree_cap).astype(np.intp)
    dm = DegreeMap(cd, edge_degrees_from_cells(layered.mesh, cd),
                   f"hp(mu=1,cap={degree_cap})")
    system = assemble(layered.mesh, dm, case.coeffs, DRECIPE, case.bc)
    want = n_values + 6
    result = solve_generalized(system.a, system.m,
                               SolverConfig(n_eigs=want, drop_zero_mode=True))
    from .eigensolve import cluster_values
    clusters = cluster_values(result.eigenvalues, cluster_rel_tol)
    eps_arg = f", eps={eps!r}" if case_id == "tc4_checkerboard" else ""
    lines = [
        f"# {case_id} reference spectrum (Neumann, nonzero eigenvalues)",
        f"# provenance: self-generated by hpvem, graded mesh sigma=0.5,"
        f" {n_layers + 1} layers, degrees capped at {degree_cap}, {system.n} DOFs",
        f"# eps: {eps!r}" if case_id == "tc4_checkerboard" else "# eps: n/a",
        "# regenerate: python -c \"import hpvem; hpvem.generate_reference_file("
        f"{case_id!r}, 'out.txt'{eps_arg}, n_layers={n_layers}, "
        f"degree_cap={degree_cap})\"",
        "# columns: value multiplicity",
    ]
    count = 0
    for cl in clusters:
        if count >= n_values:
            break
        lines.append(f"{float(np.mean(cl))!r} {len(cl)}")
        count += 1
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    Path(out_path).write_text("\n".join(lines) + "\n")
    return out_path


# ---------------------------------------------------------------------------
# study configuration and records


@dataclass(frozen=True)
class StudyConfig:
    """One convergence study: a test case, a refinement regime, its knobs."""

    case: str
    regime: str                       # "h" | "p" | "hp"
    p: int = 1                        # uniform degree of the h-regime
    mesh_sizes: tuple = tuple(range(4, 33))
    pmin: int = 2
    pmax: int = 8
    p_mesh_seeds: int = 16
    p_mesh_lloyd: int = 4
    sigma: float = 0.5
    mu: int = 1
    n_max: int = 6
    eps: float = 2.0
    stab: StabChoice = DRECIPE
    n_track: int = 4
    n_eigs: int = 0                   # 0: derived from tracked multiplicities
    rng_seed: int = 0
    cluster_rel_tol: float = 1e-6
    abscissa: str = ""                # "": default of the regime
    ref_file: str | None = None

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown test case: {self.case!r}")
        if self.regime not in ("h", "p", "hp"):
            raise ValueError(f"unknown regime: {self.regime!r}")
        if self.abscissa not in ("", "h", "sqrt_dof", "cbrt_dof"):
            raise ValueError(f"unknown abscissa: {self.abscissa!r}")

    @property
    def abscissa_kind(self):
        if self.abscissa:
            return self.abscissa
        return {"h": "h", "p": "sqrt_dof", "hp": "cbrt_dof"}[self.regime]

    @property
    def fit_model(self):
        return "algebraic" if self.regime == "h" else "exponential"


@dataclass
class ConvergenceRecord:
    run: int
    dofs: int
    h: float
    abscissa: float
    degrees: str
    ref_values: np.ndarray
    computed: np.ndarray
    errors: np.ndarray
    walltime_s: float


def _tc2_fixed_mesh(config):
    return geo.generate_voronoi(64, (-10, 10, -10, 10), lloyd_iterations=5,
                                rng_seed=config.rng_seed + 11)


def _lshape_cartesian(n):
    """Uniform Cartesian mesh of the L-shaped domain (3 n^2 square cells)."""
    pool = geo._VertexPool()
    hx = 1.0 / n
    cells = []
    for j in range(-n, n):
        for i in range(-n, n):
            if i < 0 and j < 0:
                continue
            x0, y0 = i * hx, j * hx
            cells.append([pool.add(x0, y0), pool.add(x0 + hx, y0),
                          pool.add(x0 + hx, y0 + hx), pool.add(x0, y0 + hx)])
    return geo.PolyMesh.from_cells(pool.array(), cells, "lshape")


def _mesh_for_run(case, config, value):
    """Mesh plus degree map of one refinement step (`value` is n or p)."""
    if config.regime == "h":
        n = int(value)
        if case.case_id == "tc1_square_laplace":
            mesh = geo.generate_cartesian(n, n, case.rect)
        elif case.case_id == "tc2_oscillator":
            mesh = geo.generate_cartesian(n, n, case.rect)
        elif case.case_id == "tc3_lshape":
            mesh = _lshape_cartesian(n)
        else:
            mesh = geo.generate_cartesian(2 * n, 2 * n, case.rect)
        return mesh, assign_uniform(mesh, config.p), f"p={config.p}"
    if config.regime == "p":
        p = int(value)
        if case.case_id == "tc2_oscillator":
            mesh = _tc2_fixed_mesh(config)
        elif case.case_id == "tc1_square_laplace":
            mesh = geo.generate_voronoi(config.p_mesh_seeds, case.rect,
                                        lloyd_iterations=config.p_mesh_lloyd,
                                        rng_seed=config.rng_seed + 3)
        else:
            raise ValueError(f"p-regime is not defined for {case.case_id}")
        return mesh, assign_uniform(mesh, p), f"p={p}"
    n = int(value)
    if case.case_id == "tc3_lshape":
        layered = geo.generate_graded("Lshape", n, config.sigma)
    elif case.case_id == "tc4_checkerboard":
        layered = geo.generate_graded("square_checkerboard", n, config.sigma)
    else:
        raise ValueError(f"hp-regime is not defined for {case.case_id}")
    dm = assign_hp(layered, config.mu)
    return layered.mesh, dm, f"mu={config.mu},n={n},pmax={int(dm.cell_degrees.max())}"


def _run_values(config):
    if config.regime == "h":
        return list(config.mesh_sizes)
    if config.regime == "p":
        return list(range(config.pmin, config.pmax + 1))
    return list(range(0, config.n_max + 1))


def run_study(config):
    """Execute every refinement step of a study; deterministic given the seed.

    Each step builds the mesh, assigns degrees, assembles, solves, and matches
    the computed spectrum against the reference. Any failure aborts the study
    with the completed records attached to the raised StudyError.
    """
    case = get_test_case(config.case, eps=config.eps)
    ref = reference_spectrum(config.case, config.n_track, eps=config.eps,
                             ref_file=config.ref_file)
    needed = int(ref.multiplicities.sum())
    n_eigs = config.n_eigs or needed + 2
    records = []
    for run, value in enumerate(_run_values(config)):
        t0 = time.perf_counter()
        try:
            mesh, dm, deg_summary = _mesh_for_run(case, config, value)
            system = assemble(mesh, dm, case.coeffs, config.stab, case.bc)
            solver = SolverConfig(n_eigs=n_eigs,
                                  drop_zero_mode=not case.bc.is_dirichlet,
                                  rng_seed=config.rng_seed)
            result = solve_generalized(system.a, system.m, solver)
            match = match_eigenvalues(result.eigenvalues, ref.values,
                                      ref.multiplicities, config.cluster_rel_tol)
        except Exception as exc:
            raise StudyError(f"study step {run} (value {value}) failed: {exc}",
                             records) from exc
        dofs = system.n
        h = mesh.h_max()
        absc = {"h": h, "sqrt_dof": float(np.sqrt(dofs)),
                "cbrt_dof": float(dofs ** (1.0 / 3.0))}[config.abscissa_kind]
        records.append(ConvergenceRecord(
            run=run, dofs=dofs, h=h, abscissa=absc, degrees=deg_summary,
            ref_values=ref.values.copy(), computed=match.best.copy(),
            errors=match.errors.copy(), walltime_s=time.perf_counter() - t0))
    if any(records[i].dofs >= records[i + 1].dofs for i in range(len(records) - 1)):
        raise StudyError("DOF counts are not strictly increasing", records)
    return records


# ---------------------------------------------------------------------------
# rate fits


ERROR_FLOOR = 1e-12


@dataclass(frozen=True)
class FitResult:
    eig_index: int
    model: str
    rate: float          # algebraic slope, or decay coefficient b
    r2: float
    n_used: int


def fit_rates(records, abscissa=None, model="algebraic"):
    """Least-squares convergence fits per tracked eigenvalue.

    algebraic: slope of log(err) against log(abscissa);
    exponential: b and R^2 of ln(err) = c - b * abscissa.
    Records with errors below the 1e-12 floor are excluded.
    """
    if model not in ("algebraic", "exponential"):
        raise ValueError(f"unknown fit model: {model!r}")
    if not records:
        raise FitError("no records to fit")
    n_track = len(records[0].errors)
    out = []
    for k in range(n_track):
        xs, ys = [], []
        for rec in records:
            err = rec.errors[k]
            if err <= ERROR_FLOOR:
                continue
            x = rec.abscissa if abscissa is None else getattr(rec, abscissa)
            xs.append(x)
            ys.append(err)
        if len(xs) < 3:
            raise FitError(f"eigenvalue {k + 1}: only {len(xs)} usable records (need 3)")
        xs = np.asarray(xs, dtype=float)
        ys = np.log(np.asarray(ys, dtype=float))
        if model == "algebraic":
            design = np.log(xs)
        else:
            design = xs
        slope, intercept = np.polyfit(design, ys, 1)
        pred = slope * design + intercept
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
        rate = float(slope) if model == "algebraic" else float(-slope)
        out.append(FitResult(k + 1, model, rate, r2, len(xs)))
    return out


# ---------------------------------------------------------------------------
# reports


CSV_HEADER = "run,dofs,h,abscissa,eig_index,ref_value,computed_value,rel_error,walltime_s"


def records_to_csv(records):
    lines = [CSV_HEADER]
    for rec in records:
        for k in range(len(rec.errors)):
            lines.append(",".join([
                str(rec.run), str(rec.dofs), repr(rec.h), repr(rec.abscissa),
                str(k + 1), repr(float(rec.ref_values[k])),
                repr(float(rec.computed[k])), repr(float(rec.errors[k])),
                repr(float(rec.walltime_s)),
            ]))
    return "\n".join(lines) + "\n"


def parse_csv(text):
    lines = [ln for ln in text.strip().splitlines() if ln]
    if lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append({
            "run": int(parts[0]), "dofs": int(parts[1]), "h": float(parts[2]),
            "abscissa": float(parts[3]), "eig_index": int(parts[4]),
            "ref_value": float(parts[5]), "computed_value": float(parts[6]),
            "rel_error": float(parts[7]), "walltime_s": float(parts[8]),
        })
    return rows


def summary_text(config, records, fits):
    lines = [
        f"case: {config.case}",
        f"regime: {config.regime}",
        f"stab: {config.stab.s1_kind}/{config.stab.s0_kind}",
        f"abscissa: {config.abscissa_kind}",
        f"rng_seed: {config.rng_seed}",
    ]
    if config.case == "tc4_checkerboard":
        lines.append(f"eps: {config.eps!r}")
    if config.regime == "p":
        lines.append(f"p_mesh: seeds={config.p_mesh_seeds} lloyd={config.p_mesh_lloyd}")
    if config.regime == "hp":
        lines.append(f"grading: sigma={config.sigma} mu={config.mu} n=0..{config.n_max}")
    lines.append(f"runs: {len(records)}")
    for fit in fits:
        kind = "rate" if fit.model == "algebraic" else "b"
        lines.append(f"fit eig {fit.eig_index}: model={fit.model} {kind}={fit.rate:.4f} "
                     f"R2={fit.r2:.4f} points={fit.n_used}")
    final = records[-1]
    errs = " ".join(f"{e:.3e}" for e in final.errors)
    lines.append(f"final run: dofs={final.dofs} errors=[{errs}]")
    return "\n".join(lines) + "\n"


def emit_report(records, fits, fmt="csv", out_dir=".", basename="study"):
    """Write the study artifacts; returns the list of written paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    paths = []
    if fmt in ("csv", "both"):
        path = out_dir / f"{basename}.csv"
        path.write_text(records_to_csv(records))
        paths.append(path)
    if fmt in ("summary", "both"):
        path = out_dir / f"{basename}.txt"
        cfg = getattr(records, "config", None)
        if cfg is None:
            raise ValueError("summary output needs records produced by run_study_with_config")
        path.write_text(summary_text(cfg, records, fits))
        paths.append(path)
    return paths


class StudyRun(list):
    """Records list that remembers its configuration (for summaries)."""

    def __init__(self, config, records):
        super().__init__(records)
        self.config = config


def run_study_with_config(config):
    return StudyRun(config, run_study(config))


def is_monotone_trend(errors, skip=2, floor=1e-5):
    """Decreasing error trend: each step decreases or both sides sit at the floor.

    Once the error saturates at the measurement floor (reference accuracy),
    sign crossings make the absolute error wiggle; those steps do not count
    against the trend.
    """
    e = np.asarray(errors, dtype=float)
    for i in range(skip, len(e) - 1):
        if e[i + 1] < e[i]:
            continue
        if max(e[i], e[i + 1]) <= floor:
            continue
        return False
    return True
