# pyright: reportUnusedImport=false
from weinstock.circle_fourier import FourierSeries, analyze, synthesize
from weinstock.conformal import ConformalMap, boundary_curve, hausdorff_to_disk, reconstruct
from weinstock.constructions import StarBoundary, instability_map, oscillating_domain
from weinstock.steklov_disk import BoundaryWeight, WeightedSpectrum, deficit, spectrum
from weinstock.steklov_fem import build_mesh, steklov_spectrum
from weinstock.weight_parser import parse_weight
