#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "terracelab/field.hpp"
#include "terracelab/problem.hpp"

namespace terracelab {

enum class Stability { Stable, Unstable, Marginal };

std::string to_string(Stability s);

/// Sign classification of the principal eigenvalue with a dead band.
Stability classify_stability(double lambda, double tol_marginal);

/// A periodic steady state with its principal eigenpair attached.
struct SteadyState {
    int id = -1;
    CellField values;
    double lambda = 0.0;
    CellField eigenfunction;  // positive, max-normalized to 1
    Stability stability = Stability::Marginal;
    double residual = 0.0;      // max-norm of div(A grad p) + f(x,p) on the grid
    bool outside_guess_range = false;
};

/// Discrete div(A grad .) + optional zero-order term on one periodic cell,
/// second-order centered flux form (symmetric).
class CellOperator {
  public:
    CellOperator(const PeriodicProblem& prob, int points_per_period);

    int n() const { return n_; }
    int dim() const { return prob_.dimension(); }
    std::size_t size() const { return dim() == 1 ? n_ : std::size_t(n_) * n_; }
    double dx() const { return 1.0 / n_; }
    const PeriodicProblem& problem() const { return prob_; }

    Point node(std::size_t k) const;

    /// div(A grad u) at every node.
    void apply_diffusion(const std::vector<double>& u, std::vector<double>& out) const;

    /// div(A grad p) + f(x, p).
    std::vector<double> steady_residual(const CellField& p) const;

    /// Sparse matrix of div(A grad .) + diag(potential).
    Eigen::SparseMatrix<double> assemble(const std::vector<double>& potential) const;

    /// Linearization potential df/du(x, p(x)).
    std::vector<double> linearization_potential(const CellField& p) const;

  private:
    const PeriodicProblem& prob_;
    int n_;
    // Precomputed midpoint diffusion coefficients divided by dx^2.
    std::vector<double> ax_;  // a_xx at (i+1/2, j), indexed like nodes
    std::vector<double> ay_;  // a_yy at (i, j+1/2)
};

struct EigenPair {
    double lambda = 0.0;
    CellField eigenfunction;
    double residual = 0.0;  // max-norm of L phi - lambda phi
    int iterations = 0;
};

/// Principal eigenpair of div(A grad .) + diag(potential): the largest eigenvalue,
/// with positive periodic eigenfunction normalized to max 1. Shifted inverse power
/// iteration with a sparse LU factorization of (s I - L), s above the spectrum.
EigenPair principal_eigenpair(const CellOperator& op, const std::vector<double>& potential,
                              double tol = 1e-12, int max_iters = 1000);

/// Convenience overload: potential from the linearization at p.
EigenPair principal_eigenpair(const CellOperator& op, const CellField& p);

struct NewtonOptions {
    double steady_tol = 1e-10;
    int max_iters = 60;
    double guess_margin = 0.1;
};

/// Damped Newton for the periodic elliptic problem div(A grad p) + f(x,p) = 0.
/// Attaches the eigenpair and classification. Throws ResourceFailure on divergence.
SteadyState find_steady_state(const CellOperator& op, const CellField& guess,
                              const NewtonOptions& opt, double tol_marginal);

struct StateLattice {
    std::vector<SteadyState> states;  // ascending by cell mean, ids = indices
    std::vector<int> stable_ids;      // ascending
    bool totally_ordered = false;     // stable states pairwise ordered
    std::vector<std::pair<int, int>> intersecting_pairs;
    int zero_id = -1;
    int pbar_id = -1;

    const SteadyState& state(int id) const { return states.at(id); }
    const SteadyState& pbar() const { return states.at(pbar_id); }
    const SteadyState& zero() const { return states.at(zero_id); }
    /// Stable states from pbar down to zero.
    std::vector<int> stable_descending() const;
};

struct EnumerateOptions {
    std::vector<double> probe_levels;  // empty = default ladder 0.0 .. 1.0
    double relax_horizon = 240.0;
    double settle_tol = 1e-9;  // max|du|/dt threshold to stop relaxation early
};

/// Constant-probe relaxation plus Newton polish; deduplicates and classifies.
/// Heuristic enumeration: missed states are possible and documented.
StateLattice enumerate_stable_states(const CellOperator& op, const RunSpec& run,
                                     const EnumerateOptions& opt = {});

/// Lattice restricted to states pointwise <= the given stable state (the
/// sub-problem between 0 and that state). Ids are reassigned; the second
/// member maps new ids to the original ones.
std::pair<StateLattice, std::vector<int>> restrict_lattice(const StateLattice& lattice,
                                                           int top_id, double tol);

}  // namespace terracelab
