#pragma once

// Projected multi-point zeroth-order Adam: the pieces of one iteration, free of
// any knowledge about what the black-box objective computes.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gridtune::zo {

using Vector = std::vector<double>;

struct BoxBounds {
    Vector lower;
    Vector upper;

    /// [0,1]^d, the feasible set of the normalized decision space.
    static BoxBounds unit(std::size_t d);

    std::size_t dim() const noexcept { return lower.size(); }

    /// Throws unless both vectors have the same length d >= 1 and lower <= upper.
    void validate() const;

    bool contains(std::span<const double> x) const;

    friend bool operator==(const BoxBounds&, const BoxBounds&) = default;
};

/// Affine map between physical parameter values and [0,1] via a feasible interval.
class AffineScaling {
public:
    explicit AffineScaling(BoxBounds physical);

    std::size_t dim() const noexcept { return physical_.dim(); }
    const BoxBounds& physical() const noexcept { return physical_; }

    Vector normalize(std::span<const double> physical) const;
    Vector denormalize(std::span<const double> normalized) const;

private:
    BoxBounds physical_;
};

/// Seeded source of standard normal draws whose full state can be saved and restored.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    double normal() { return normal_(engine_); }

    std::string save_state() const;
    void load_state(const std::string& state);

    friend bool operator==(const Rng& a, const Rng& b) { return a.save_state() == b.save_state(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// Uniform direction on the unit sphere S^{d-1}: normalized Gaussian draw.
Vector sample_unit_direction(std::size_t d, Rng& rng);

using Oracle = std::function<double(std::span<const double>)>;

/// (d / 2r) (f(x + r u) - f(x - r u)) u. The perturbed points are passed to the
/// oracle unprojected.
Vector two_point_gradient(const Oracle& oracle, std::span<const double> x, double r,
                          std::span<const double> u);

/// Function values at x + r u and x - r u for one sampled direction.
struct DirectionEval {
    double f_plus = 0.0;
    double f_minus = 0.0;
    Vector u;
};

struct GradientEstimate {
    Vector g;
    std::size_t batch_size = 0;

    double norm() const;
};

/// Average of the two-point estimates over the batch, reduced in batch order.
GradientEstimate multi_point_gradient(std::span<const DirectionEval> evals, double r, std::size_t d);

struct AdamState {
    Vector m;
    Vector v;
    /// Index of the next update; bias correction uses beta^k with k = 1 first.
    std::uint64_t k = 1;
    double beta1 = 0.5;
    double beta2 = 0.99;
    double epsilon = 1e-8;

    static AdamState zeros(std::size_t d, double beta1, double beta2, double epsilon);

    void validate() const;

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct AdamStep {
    AdamState state;
    Vector direction;   ///< m_hat / (sqrt(v_hat) + epsilon)
    Vector m_hat;
    Vector v_hat;
};

AdamStep adam_update(const AdamState& state, const GradientEstimate& g);

/// Euclidean projection onto the box: elementwise clamp, bounds inclusive.
Vector project_box(std::span<const double> x, const BoxBounds& bounds);

struct Schedules {
    double eta = 0.1;
    double r = 0.1;
    double gamma_eta = 0.9;
    double gamma_r = 0.95;
    double eta_min = 0.001;
    double r_min = 0.001;

    void validate() const;

    friend bool operator==(const Schedules&, const Schedules&) = default;
};

/// eta <- max(gamma_eta eta, eta_min), r <- max(gamma_r r, r_min).
Schedules decay_schedules(const Schedules& s);

/// ||x_next - x_prev||_2 <= tau.
bool converged(std::span<const double> x_prev, std::span<const double> x_next, double tau);

double euclidean_norm(std::span<const double> x);

} // namespace gridtune::zo
