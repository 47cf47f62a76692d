"""Linear-elastic boundary-value problems solved by an energy-trained
network whose Dirichlet boundary layer is a finite-element interpolant."""
from .analytic import CantileverSpec, bar_1d_solution, timoshenko_displacement, timoshenko_stress
from .bcfield import (STRATEGIES, ApproxDistanceField, BlendedFEMField, DistanceField, SoftField,
                      StrategyUnavailableError, blended_eval, field_eval, make_strategy)
from .elasticity import Material, Strain2D, Stress2D, energy_density, stiffness_matrix, strain_from_gradient, stress
from .energy import (Bar1D, EnergyBreakdown, EnergyFunctional, Problem, energy_1d, fe_layer_energy,
                     interior_energy, soft_penalty, total_loss, traction_energy)
from .experiments import (ConfigError, ExperimentConfig, ExperimentReport, UndefinedMetricError,
                          relative_l1, reproduce_all, run_experiment)
from .femref import FemSolution, SingularSystemError, interpolate, solve_fem
from .mesh import (DirichletSpec, DomainDecomposition, Mesh, NeumannSpec, decompose, neumann_data,
                   parse_msh, read_msh, serialize_msh, structured_rectangle, structured_unit_square,
                   write_msh)
from .net import MlpSpec, NonFiniteLossError, forward, forward_with_jacobian, init_params, loss_gradient
from .optim import OptimConfig, TrainTrace, run_adam, run_lbfgs

__version__ = "0.1.0"
