#include "gridtune/zo.hpp"

#include "gridtune/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace gridtune::zo {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw Error(ErrorCode::invalid_dimension, os.str());
    }
}

bool all_finite(std::span<const double> x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

} // namespace

BoxBounds BoxBounds::unit(std::size_t d)
{
    if (d == 0)
        throw Error(ErrorCode::invalid_dimension, "box dimension must be at least 1");
    return BoxBounds{Vector(d, 0.0), Vector(d, 1.0)};
}

void BoxBounds::validate() const
{
    if (lower.empty())
        throw Error(ErrorCode::invalid_dimension, "box dimension must be at least 1");
    require_same_dim(lower.size(), upper.size(), "box bounds");
    for (std::size_t j = 0; j < lower.size(); ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j]) {
            std::ostringstream os;
            os << "box bounds: entry " << j << " has lower " << lower[j] << " > upper " << upper[j];
            throw Error(ErrorCode::invalid_argument, os.str());
        }
    }
}

bool BoxBounds::contains(std::span<const double> x) const
{
    if (x.size() != lower.size())
        return false;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (!(x[j] >= lower[j] && x[j] <= upper[j]))
            return false;
    return true;
}

AffineScaling::AffineScaling(BoxBounds physical) : physical_(std::move(physical))
{
    physical_.validate();
    for (std::size_t j = 0; j < physical_.dim(); ++j) {
        if (!(physical_.upper[j] > physical_.lower[j])) {
            std::ostringstream os;
            os << "scaling: entry " << j << " has an empty interval";
            throw Error(ErrorCode::invalid_argument, os.str());
        }
    }
}

Vector AffineScaling::normalize(std::span<const double> physical) const
{
    require_same_dim(physical.size(), dim(), "normalize");
    Vector out(physical.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = (physical[j] - physical_.lower[j]) / (physical_.upper[j] - physical_.lower[j]);
    return out;
}

Vector AffineScaling::denormalize(std::span<const double> normalized) const
{
    require_same_dim(normalized.size(), dim(), "denormalize");
    Vector out(normalized.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = physical_.lower[j] + normalized[j] * (physical_.upper[j] - physical_.lower[j]);
    return out;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::string Rng::save_state() const
{
    std::ostringstream os;
    os << engine_ << ' ' << normal_;
    return os.str();
}

void Rng::load_state(const std::string& state)
{
    std::istringstream is(state);
    std::mt19937_64 engine;
    std::normal_distribution<double> normal;
    is >> engine >> normal;
    if (is.fail())
        throw Error(ErrorCode::invalid_argument, "malformed RNG state");
    engine_ = engine;
    normal_ = normal;
}

Vector sample_unit_direction(std::size_t d, Rng& rng)
{
    if (d == 0)
        throw Error(ErrorCode::invalid_dimension, "direction dimension must be at least 1");
    Vector u(d);
    for (;;) {
        for (auto& e : u)
            e = rng.normal();
        const double n = euclidean_norm(u);
        if (n >= 1e-12) {
            for (auto& e : u)
                e /= n;
            return u;
        }
    }
}

Vector two_point_gradient(const Oracle& oracle, std::span<const double> x, double r,
                          std::span<const double> u)
{
    require_same_dim(x.size(), u.size(), "two_point_gradient");
    if (!(r > 0.0))
        throw Error(ErrorCode::invalid_argument, "smoothing radius must be positive");
    const std::size_t d = x.size();
    Vector plus(d), minus(d);
    for (std::size_t j = 0; j < d; ++j) {
        plus[j] = x[j] + r * u[j];
        minus[j] = x[j] - r * u[j];
    }
    const double f_plus = oracle(plus);
    if (!std::isfinite(f_plus))
        throw OracleFailure(plus, "oracle returned a non-finite value at x + r u");
    const double f_minus = oracle(minus);
    if (!std::isfinite(f_minus))
        throw OracleFailure(minus, "oracle returned a non-finite value at x - r u");

    const double scale = static_cast<double>(d) / (2.0 * r) * (f_plus - f_minus);
    Vector g(d);
    for (std::size_t j = 0; j < d; ++j)
        g[j] = scale * u[j];
    return g;
}

double GradientEstimate::norm() const { return euclidean_norm(g); }

GradientEstimate multi_point_gradient(std::span<const DirectionEval> evals, double r, std::size_t d)
{
    if (evals.empty())
        throw Error(ErrorCode::invalid_batch, "gradient batch is empty");
    if (!(r > 0.0))
        throw Error(ErrorCode::invalid_argument, "smoothing radius must be positive");
    if (d == 0)
        throw Error(ErrorCode::invalid_dimension, "gradient dimension must be at least 1");

    GradientEstimate est{Vector(d, 0.0), evals.size()};
    const double n = static_cast<double>(evals.size());
    for (const auto& e : evals) {
        require_same_dim(e.u.size(), d, "multi_point_gradient");
        if (!std::isfinite(e.f_plus) || !std::isfinite(e.f_minus))
            throw Error(ErrorCode::oracle_failure, "non-finite function value in gradient batch");
        const double scale = static_cast<double>(d) / (2.0 * r) * (e.f_plus - e.f_minus);
        for (std::size_t j = 0; j < d; ++j)
            est.g[j] += scale * e.u[j];
    }
    for (auto& gj : est.g)
        gj /= n;
    return est;
}

AdamState AdamState::zeros(std::size_t d, double beta1, double beta2, double epsilon)
{
    AdamState s{Vector(d, 0.0), Vector(d, 0.0), 1, beta1, beta2, epsilon};
    s.validate();
    return s;
}

void AdamState::validate() const
{
    require_same_dim(m.size(), v.size(), "adam moments");
    if (k < 1)
        throw Error(ErrorCode::invalid_argument, "adam iteration index must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw Error(ErrorCode::invalid_argument, "adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0))
        throw Error(ErrorCode::invalid_argument, "adam epsilon must be positive");
    for (double vj : v)
        if (!(vj >= 0.0))
            throw Error(ErrorCode::invalid_argument, "adam second moment must be nonnegative");
}

AdamStep adam_update(const AdamState& state, const GradientEstimate& g)
{
    state.validate();
    require_same_dim(state.m.size(), g.g.size(), "adam_update");
    if (!all_finite(g.g))
        throw Error(ErrorCode::oracle_failure, "non-finite gradient estimate");

    const std::size_t d = g.g.size();
    AdamStep out;
    out.state = state;
    out.direction.resize(d);
    out.m_hat.resize(d);
    out.v_hat.resize(d);

    const double k = static_cast<double>(state.k);
    const double c1 = 1.0 - std::pow(state.beta1, k);
    const double c2 = 1.0 - std::pow(state.beta2, k);
    for (std::size_t j = 0; j < d; ++j) {
        const double gj = g.g[j];
        out.state.m[j] = state.beta1 * state.m[j] + (1.0 - state.beta1) * gj;
        out.state.v[j] = state.beta2 * state.v[j] + (1.0 - state.beta2) * gj * gj;
        out.m_hat[j] = out.state.m[j] / c1;
        out.v_hat[j] = out.state.v[j] / c2;
        out.direction[j] = out.m_hat[j] / (std::sqrt(out.v_hat[j]) + state.epsilon);
    }
    out.state.k = state.k + 1;
    return out;
}

Vector project_box(std::span<const double> x, const BoxBounds& bounds)
{
    require_same_dim(x.size(), bounds.dim(), "project_box");
    Vector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = std::max(bounds.lower[j], std::min(bounds.upper[j], x[j]));
    return out;
}

void Schedules::validate() const
{
    auto check = [](bool ok, const char* msg) {
        if (!ok)
            throw Error(ErrorCode::invalid_argument, msg);
    };
    check(eta > 0.0 && r > 0.0, "schedules: eta and r must be positive");
    check(gamma_eta > 0.0 && gamma_eta < 1.0, "schedules: gamma_eta must lie in (0, 1)");
    check(gamma_r > 0.0 && gamma_r < 1.0, "schedules: gamma_r must lie in (0, 1)");
    check(eta_min > 0.0 && r_min > 0.0, "schedules: floors must be positive");
    check(eta >= eta_min && r >= r_min, "schedules: current values are below their floors");
}

Schedules decay_schedules(const Schedules& s)
{
    Schedules next = s;
    next.eta = std::max(s.gamma_eta * s.eta, s.eta_min);
    next.r = std::max(s.gamma_r * s.r, s.r_min);
    return next;
}

bool converged(std::span<const double> x_prev, std::span<const double> x_next, double tau)
{
    require_same_dim(x_prev.size(), x_next.size(), "converged");
    if (!(tau > 0.0))
        throw Error(ErrorCode::invalid_argument, "convergence tolerance must be positive");
    double sq = 0.0;
    for (std::size_t j = 0; j < x_prev.size(); ++j) {
        const double dj = x_next[j] - x_prev[j];
        sq += dj * dj;
    }
    return std::sqrt(sq) <= tau;
}

double euclidean_norm(std::span<const double> x)
{
    double sq = 0.0;
    for (double v : x)
        sq += v * v;
    return std::sqrt(sq);
}

} // namespace gridtune::zo
