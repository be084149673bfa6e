"""The subcommands of the command-line driver.

Sweep points run as independent tasks on a thread pool; tables are assembled in sweep order
so that CSV bodies only depend on the configuration and the seed.
"""

from concurrent.futures import ThreadPoolExecutor
from logging import Logger
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from weinstock.circle_fourier import FourierSeries, grid, holder_seminorm
from weinstock.config import ExperimentConfig
from weinstock.conformal import (
    BLOCH_CONSTANT,
    ConformalMap,
    apriori_norm,
    boundary_curve,
    boundary_weight,
    derivative,
    disk_grid,
    enclosure_radii,
    evaluate,
    hausdorff_to_disk,
    perimeter,
    reconstruct,
    univalence_margin,
)
from weinstock.constructions import (
    DEFAULT_CORNER_WIDTH,
    StarBoundary,
    instability_map,
    measure_pairing,
    oscillating_domain,
    sharpness_weight,
)
from weinstock.errors import InvalidInputError
from weinstock.pipeline import Experiment, ExperimentResult
from weinstock.reports import Table, export_boundary, export_curve, export_map, export_mesh
from weinstock.steklov_disk import (
    BoundaryWeight,
    converged_spectrum,
    deficit,
    hminus_half_distance,
    linf_distance,
    linf_stability_ratio,
    random_normalized_weight,
    sobolev_stability_ratio,
    spectrum_ladder,
)
from weinstock.steklov_fem import assemble, build_mesh, solve_steklov
from weinstock.weight_parser import parse_weight

SOBOLEV_CONSTANT = 1 + np.sqrt(2)
LINF_RATIO_CAP = 1e3
EXPONENT_RATIO_FLOOR = 1e-3
APRIORI_BOUND = 2.0
HAUSDORFF_FACTOR = 1 + 1 / BLOCH_CONSTANT
SHARPNESS_SAMPLES = 4096


def parallel_map[T, R](fn: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    """``map`` on a thread pool; results keep the order of ``items``."""
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def load_weight(config: ExperimentConfig, default: str) -> BoundaryWeight:
    return parse_weight(config.weight if config.weight is not None else default, config.grid)


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(later < earlier for earlier, later in zip(values, values[1:]))


class SpectrumExperiment(Experiment):
    name = 'spectrum'
    default_weight = '1'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        weight = load_weight(config, self.default_weight)
        ladder = spectrum_ladder(weight, config.k_max, config.tol, config.n_modes)
        final = ladder[-1].eigenvalues

        spectrum = Table(('k', 'sigma'))
        for k, sigma in enumerate(final):
            spectrum.append(k, float(sigma))
        convergence = Table(('n_modes', 'k', 'sigma'))
        for step in ladder:
            for k, sigma in enumerate(step.eigenvalues):
                convergence.append(step.n_modes, k, float(sigma))
        logger.info('sigma_1 = %.12g with %d modes', final[1], ladder[-1].n_modes)

        scale = max(1.0, float(np.max(np.abs(final))))
        return ExperimentResult(
            tables={'spectrum': spectrum, 'ladder': convergence},
            results={
                'eigenvalues': final,
                'n_modes': ladder[-1].n_modes,
                'mean': weight.mean,
                'normalized_sigma_1': float(final[1] * weight.mean),
                'min_weight': weight.min_value,
            },
            assertions={
                'sigma_0_vanishes': bool(abs(final[0]) <= 1e-10),
                'nondecreasing': bool(np.all(np.diff(final) >= -1e-12 * scale)),
            },
        )


class DeficitSweepExperiment(Experiment):
    name = 'deficit-sweep'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        orders = config.sweep_values('N', (4, 8, 16, 32, 64))
        if min(orders) < 4:
            raise InvalidInputError('The deficit bracket needs N >= 4')
        if max(config.alpha) >= 1:
            raise InvalidInputError('Amplitudes must stay below 1 to keep the weight positive')
        points = [(amplitude, n) for amplitude in config.alpha for n in orders]

        def measure(point: tuple[float, int]) -> tuple[float, int, float, float, float]:
            amplitude, n = point
            m = max(config.grid, 8 * n)
            series = FourierSeries.from_mapping({0: 1.0, n: amplitude / 2, -n: amplitude / 2}, m)
            value = deficit(BoundaryWeight.from_series(series, m), config.tol)
            return amplitude, n, value, amplitude**2 / (n - 3), n * value / amplitude**2

        table = Table(('alpha', 'N', 'deficit', 'upper_bound', 'scaled_deficit'))
        for row in parallel_map(measure, points, config.workers):
            table.append(*row)

        deficits = np.array(table.column('deficit'))
        bounds = np.array(table.column('upper_bound'))
        scaled = np.array(table.column('scaled_deficit'))
        violations = int(np.sum(deficits > bounds * (1 + 1e-9)))
        c0 = float(scaled.min())
        logger.info('deficit sweep: %d violations, fitted c0 = %.6g', violations, c0)
        return ExperimentResult(
            tables={'deficit_sweep': table},
            results={'violations': violations, 'c0': c0, 'max_scaled_deficit': float(scaled.max())},
            assertions={'upper_bracket': violations == 0, 'lower_bracket': c0 > 0},
        )


class StabilityExperiment(Experiment):
    name = 'stability'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        counts = (200, 50, 50) if config.samples is None else (config.samples,) * 3
        seeds = np.random.SeedSequence(config.seed).spawn(sum(counts))
        sobolev_seeds = seeds[: counts[0]]
        hausdorff_seeds = seeds[counts[0] : counts[0] + counts[1]]
        univalence_seeds = seeds[counts[0] + counts[1] :]
        alpha = config.holder_exponent
        exponent = 2 * (1 + 1 / alpha)

        def sobolev_point(seed: np.random.SeedSequence) -> tuple[Any, ...]:
            rng = np.random.default_rng(seed)
            bandwidth = int(rng.integers(2, 33))
            weight = random_normalized_weight(rng, bandwidth, rng.uniform(0.02, 0.5), config.grid)
            value = deficit(weight, config.tol)
            norm = float(np.max(np.abs(weight.samples))) + holder_seminorm(weight.samples, alpha)
            return (
                bandwidth,
                linf_distance(weight),
                value,
                hminus_half_distance(weight),
                sobolev_stability_ratio(weight, value),
                linf_stability_ratio(weight, alpha),
                norm,
                norm <= APRIORI_BOUND,
            )

        def hausdorff_point(seed: np.random.SeedSequence) -> tuple[Any, ...]:
            rng = np.random.default_rng(seed)
            bandwidth = int(rng.integers(2, 17))
            weight = random_normalized_weight(rng, bandwidth, rng.uniform(0.005, 0.1), config.grid)
            conformal_map = reconstruct(weight)
            eps = linf_distance(boundary_weight(conformal_map, config.grid))
            distance = hausdorff_to_disk(boundary_curve(conformal_map, config.grid))
            value = deficit(weight, config.tol)
            ratio = value / distance**exponent if distance > 0 else float('inf')
            return bandwidth, eps, distance, HAUSDORFF_FACTOR * eps, value, ratio

        def univalence_point(seed: np.random.SeedSequence) -> tuple[Any, ...]:
            rng = np.random.default_rng(seed)
            bandwidth = int(rng.integers(2, 33))
            weight = random_normalized_weight(rng, bandwidth, rng.uniform(0.01, 0.2), config.grid)
            return bandwidth, linf_distance(weight), univalence_margin(reconstruct(weight))

        sobolev = Table(
            (
                'index',
                'bandwidth',
                'sup_distance',
                'deficit',
                'hminus_half',
                'sobolev_ratio',
                'linf_ratio',
                'holder_norm',
                'in_class',
            )
        )
        for index, row in enumerate(parallel_map(sobolev_point, sobolev_seeds, config.workers)):
            sobolev.append(index, *row)
        hausdorff = Table(
            ('index', 'bandwidth', 'eps', 'hausdorff', 'upper_bound', 'deficit', 'exponent_ratio')
        )
        for index, row in enumerate(parallel_map(hausdorff_point, hausdorff_seeds, config.workers)):
            hausdorff.append(index, *row)
        univalence = Table(('index', 'bandwidth', 'sup_distance', 'margin'))
        for index, row in enumerate(
            parallel_map(univalence_point, univalence_seeds, config.workers)
        ):
            univalence.append(index, *row)

        admissible = [
            ratio
            for ratio, value in zip(sobolev.column('sobolev_ratio'), sobolev.column('deficit'))
            if value <= 1.0
        ]
        in_class = [
            ratio
            for ratio, member in zip(sobolev.column('linf_ratio'), sobolev.column('in_class'))
            if member
        ]
        hausdorff_violations = sum(
            distance > bound
            for distance, bound in zip(
                hausdorff.column('hausdorff'), hausdorff.column('upper_bound')
            )
        )
        univalence_violations = sum(margin > 1.0 for margin in univalence.column('margin'))
        min_exponent_ratio = min(hausdorff.column('exponent_ratio'), default=float('inf'))
        max_sobolev = max(admissible, default=0.0)
        max_linf = max(in_class, default=0.0)
        logger.info(
            'stability: max H^-1/2 ratio %.6g, max L^inf ratio %.6g (%d in class)',
            max_sobolev,
            max_linf,
            len(in_class),
        )
        return ExperimentResult(
            tables={'sobolev': sobolev, 'hausdorff': hausdorff, 'univalence': univalence},
            results={
                'max_sobolev_ratio': max_sobolev,
                'sobolev_constant': SOBOLEV_CONSTANT,
                'admissible_weights': len(admissible),
                'max_linf_ratio': max_linf,
                'weights_in_class': len(in_class),
                'hausdorff_violations': hausdorff_violations,
                'hausdorff_exponent': exponent,
                'min_exponent_ratio': min_exponent_ratio,
                'univalence_violations': univalence_violations,
                'max_margin': max(univalence.column('margin'), default=0.0),
            },
            assertions={
                'sobolev_bound': max_sobolev <= SOBOLEV_CONSTANT + 1e-8,
                'linf_bounded': bool(np.isfinite(max_linf)) and max_linf <= LINF_RATIO_CAP,
                'hausdorff_bound': hausdorff_violations == 0,
                'deficit_controls_hausdorff': min_exponent_ratio >= EXPONENT_RATIO_FLOOR,
                'univalence': univalence_violations == 0,
            },
        )


class ReconstructExperiment(Experiment):
    name = 'reconstruct'
    default_weight = '1'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        weight = load_weight(config, self.default_weight)
        conformal_map = reconstruct(weight, config.n_modes)
        export_map(conformal_map, output_dir / 'map.csv')
        curve = boundary_curve(conformal_map, config.grid)
        export_curve(curve, output_dir / 'curve.csv')

        speed = np.abs(derivative(conformal_map, np.exp(1j * grid(weight.grid_size))))
        roundtrip = float(np.max(np.abs(speed - weight.samples)))
        interior = np.abs(derivative(conformal_map, disk_grid(256)))
        margin = univalence_margin(conformal_map)
        inner, outer = enclosure_radii(conformal_map)
        distance = hausdorff_to_disk(curve) if margin <= 1.0 else None
        logger.info('reconstruct: roundtrip error %.3e, univalence margin %.6g', roundtrip, margin)

        slack = 1e-9 * weight.max_value
        return ExperimentResult(
            results={
                'n_terms': conformal_map.n_terms,
                'degree': conformal_map.degree,
                'tail_energy': conformal_map.tail_energy,
                'truncation_warning': conformal_map.truncation_warning,
                'roundtrip_error': roundtrip,
                'perimeter': perimeter(conformal_map),
                'univalence_margin': margin,
                'apriori_norm': apriori_norm(conformal_map, config.holder_exponent),
                'enclosure_radii': [inner, outer],
                'hausdorff_to_disk': distance,
            },
            assertions={
                'roundtrip': roundtrip <= max(1e-9, 10 * conformal_map.tail_energy),
                'maximum_principle': bool(
                    interior.min() >= weight.min_value - slack
                    and interior.max() <= weight.max_value + slack
                ),
            },
        )


class HomogenizeExperiment(Experiment):
    name = 'homogenize'
    default_weight = '1.2 + 0.1*cos(2*t)'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        weight = load_weight(config, self.default_weight)
        base = StarBoundary.circle(1.0, config.grid)
        theta = grid(weight.grid_size)
        perimeter_target = float(2 * np.pi * np.mean(weight.samples))
        pairing_target = float(2 * np.pi * np.mean(weight.samples * np.cos(theta) ** 2))
        disk_sigmas = converged_spectrum(weight, config.k_max, config.tol).eigenvalues[1:]
        modes = range(1, config.k_max + 1)
        n_radial, n_angular = config.mesh

        def measure(k: int) -> tuple[Any, ...]:
            sharp = oscillating_domain(base, weight, k)
            smooth = oscillating_domain(base, weight, k, corner_width=DEFAULT_CORNER_WIDTH)
            export_boundary(sharp, output_dir / 'boundaries' / f'teeth_{k}.csv')
            pairing = measure_pairing(sharp, lambda x, y: x**2)
            mesh = build_mesh(smooth, n_radial, max(n_angular, 16 * k))
            export_mesh(mesh, output_dir / 'meshes', f'teeth_{k}')
            sigmas = solve_steklov(*assemble(mesh), config.k_max)[1:]
            return (
                k,
                2 * np.pi / k,
                sharp.perimeter,
                abs(sharp.perimeter - perimeter_target) / perimeter_target,
                pairing,
                abs(pairing - pairing_target),
                *(float(sigma) for sigma in sigmas),
                *(float(abs(sigma - target)) for sigma, target in zip(sigmas, disk_sigmas)),
            )

        table = Table(
            ('teeth', 'eps', 'perimeter', 'perimeter_error', 'pairing', 'pairing_error')
            + tuple(f'fem_sigma_{j}' for j in modes)
            + tuple(f'fem_error_{j}' for j in modes)
        )
        for row in parallel_map(measure, config.teeth, config.workers):
            table.append(*row)
        errors = [table.column(f'fem_error_{j}') for j in modes]
        logger.info('homogenize: disk sigma_1(D, Theta) = %.10g', disk_sigmas[0])
        return ExperimentResult(
            tables={'homogenize': table},
            results={
                'perimeter_target': perimeter_target,
                'pairing_target': pairing_target,
                'disk_sigmas': disk_sigmas,
                'final_fem_errors': [column[-1] for column in errors],
            },
            assertions={
                'perimeter_within_2_percent': table.column('perimeter_error')[-1] <= 0.02,
                'pairing_converges': strictly_decreasing(table.column('pairing_error')),
                'fem_converges': strictly_decreasing(errors[0]),
                'fem_higher_modes_converge': all(column[-1] < column[0] for column in errors),
            },
        )


class InstabilityExperiment(Experiment):
    name = 'instability'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        if config.weight is None:
            base = ConformalMap.identity()
        else:
            base = reconstruct(parse_weight(config.weight, config.grid), config.n_modes)
        orders = config.sweep_values('N', (4, 8, 16, 32, 64))
        modes = range(1, config.k_max + 1)
        # The oscillating speeds converge weakly to Lambda, so the normalized sigma_k of the
        # disk with constant weight is the limit.
        limits = [(j + 1) // 2 for j in modes]

        def measure(n: int) -> tuple[Any, ...]:
            mapped = instability_map(base, n)
            export_map(mapped, output_dir / 'maps' / f'instability_{n}.csv')
            weight = boundary_weight(mapped)
            length = perimeter(mapped)
            sigmas = converged_spectrum(weight, config.k_max, config.tol).eigenvalues[1:]
            level = mapped.metadata['lambda']
            gaps = [
                abs(length * sigma / (2 * np.pi * limit) - 1)
                for sigma, limit in zip(sigmas, limits)
            ]
            return (
                n,
                level,
                length,
                2 * np.pi * level,
                *(float(sigma) for sigma in sigmas),
                *(float(gap) for gap in gaps),
                float(np.max(np.abs(np.log(weight.samples)))),
            )

        table = Table(
            ('n', 'lambda', 'perimeter', 'perimeter_limit')
            + tuple(f'sigma_{j}' for j in modes)
            + ('weinstock_gap',)
            + tuple(f'gap_{j}' for j in modes[1:])
            + ('log_sup',)
        )
        for row in parallel_map(measure, orders, config.workers):
            table.append(*row)

        gaps = table.column('weinstock_gap')
        higher = [table.column(f'gap_{j}') for j in modes[1:]]
        log_sups = table.column('log_sup')
        logger.info('instability: gap %.3e at n=%d', gaps[-1], orders[-1])
        return ExperimentResult(
            tables={'instability': table},
            results={
                'final_gap': gaps[-1],
                'final_gaps': [gaps[-1]] + [column[-1] for column in higher],
                'log_sup_bound': max(log_sups),
            },
            assertions={
                'gap_decreases': strictly_decreasing(gaps),
                'gap_below_5_percent': gaps[-1] < 0.05,
                'higher_gaps_decrease': all(column[-1] < column[0] for column in higher),
                'log_speed_bounded': bool(
                    np.isfinite(max(log_sups)) and max(log_sups) <= 2 * min(log_sups) + 1e-12
                ),
            },
        )


class SharpnessExperiment(Experiment):
    name = 'sharpness'

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        orders = config.sweep_values('N', (8, 16, 32, 64))
        exponent = 2 - config.eps

        def measure(n: int) -> tuple[Any, ...]:
            marked = sharpness_weight(n, config.eps, max(config.grid, 8 * n))
            value = deficit(marked.weight, config.tol)
            conformal_map = reconstruct(marked.weight)
            distance = hausdorff_to_disk(
                boundary_curve(conformal_map, SHARPNESS_SAMPLES), SHARPNESS_SAMPLES
            )
            a = marked.amplitude
            at_one = complex(evaluate(conformal_map, 1.0))
            return (
                n,
                a,
                value,
                marked.deficit_bound,
                distance,
                marked.hausdorff_proxy,
                distance / marked.hausdorff_proxy,
                value / distance**exponent,
                abs(at_one - 1 - a / n),
                marked.endpoint_bound,
            )

        table = Table(
            (
                'n',
                'amplitude',
                'deficit',
                'deficit_bound',
                'hausdorff',
                'hausdorff_proxy',
                'measured_c',
                'ratio',
                'endpoint_error',
                'endpoint_bound',
            )
        )
        for row in parallel_map(measure, orders, config.workers):
            table.append(*row)

        ratios = table.column('ratio')
        constants = table.column('measured_c')
        logger.info('sharpness: ratio range [%.4g, %.4g]', min(ratios), max(ratios))
        return ExperimentResult(
            tables={'sharpness': table},
            results={'ratio_min': min(ratios), 'ratio_max': max(ratios), 'c_min': min(constants)},
            assertions={
                'deficit_upper': all(
                    d <= b for d, b in zip(table.column('deficit'), table.column('deficit_bound'))
                ),
                'hausdorff_lower': min(constants) >= 0.5,
                'ratio_bounded': max(ratios) <= 4 * min(ratios),
                'endpoint_series': all(
                    e <= b
                    for e, b in zip(table.column('endpoint_error'), table.column('endpoint_bound'))
                ),
            },
        )


EXPERIMENTS: dict[str, type[Experiment]] = {
    experiment.name: experiment
    for experiment in (
        SpectrumExperiment,
        DeficitSweepExperiment,
        StabilityExperiment,
        ReconstructExperiment,
        HomogenizeExperiment,
        InstabilityExperiment,
        SharpnessExperiment,
    )
}
