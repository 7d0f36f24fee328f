#include "gridtune/network.hpp"

#include "gridtune/error.hpp"

#include <cmath>

namespace gridtune::sim {

Eigen::MatrixXd susceptance_matrix(const GridModel& model, const std::vector<bool>& line_closed)
{
    const auto n = static_cast<Eigen::Index>(model.buses.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < model.lines.size(); ++k) {
        if (!line_closed[k])
            continue;
        const auto& l = model.lines[k];
        const auto i = static_cast<Eigen::Index>(model.bus_index(l.from));
        const auto j = static_cast<Eigen::Index>(model.bus_index(l.to));
        const double y = 1.0 / l.x;
        b(i, i) += y;
        b(j, j) += y;
        b(i, j) -= y;
        b(j, i) -= y;
    }
    return b;
}

Eigen::VectorXd dc_power_flow(const GridModel& model, const std::vector<bool>& line_closed,
                              std::span<const double> injections, std::size_t reference_bus)
{
    const std::size_t n = model.buses.size();
    if (injections.size() != n)
        throw Error(ErrorCode::invalid_dimension, "power flow: injection vector size mismatch");
    if (!is_connected(model, line_closed))
        throw Error(ErrorCode::topology, "power flow: network is not connected");

    const Eigen::MatrixXd b = susceptance_matrix(model, line_closed);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (n == 1)
        return theta;

    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < n; ++i)
        if (i != reference_bus)
            keep.push_back(static_cast<Eigen::Index>(i));
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd reduced(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        rhs(a) = injections[static_cast<std::size_t>(keep[a])];
        for (Eigen::Index c = 0; c < m; ++c)
            reduced(a, c) = b(keep[a], keep[c]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
    if (ldlt.info() != Eigen::Success)
        throw Error(ErrorCode::topology, "power flow: singular susceptance matrix");
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    for (Eigen::Index a = 0; a < m; ++a)
        theta(keep[a]) = sol(a);
    return theta;
}

Network::Network(const GridModel& model, const std::vector<bool>& line_closed)
    : n_bus_(model.buses.size()), b_(susceptance_matrix(model, line_closed))
{
    if (!is_connected(model, line_closed))
        throw Error(ErrorCode::topology, "network is not connected");

    std::vector<bool> is_forming(n_bus_, false);
    for (const auto& u : model.ibrs) {
        if (u.kind() == IbrKind::gfm) {
            const auto i = model.bus_index(u.bus);
            forming_.push_back(i);
            is_forming[i] = true;
        }
    }
    if (forming_.empty())
        throw Error(ErrorCode::topology, "network has no grid-forming terminal");
    for (std::size_t i = 0; i < n_bus_; ++i)
        if (!is_forming[i])
            free_.push_back(i);

    const auto nf = static_cast<Eigen::Index>(free_.size());
    const auto ng = static_cast<Eigen::Index>(forming_.size());
    Eigen::MatrixXd b_ff(nf, nf), b_fg(nf, ng);
    for (Eigen::Index a = 0; a < nf; ++a) {
        for (Eigen::Index c = 0; c < nf; ++c)
            b_ff(a, c) = b_(free_[a], free_[c]);
        for (Eigen::Index c = 0; c < ng; ++c)
            b_fg(a, c) = b_(free_[a], forming_[c]);
    }
    forming_rows_.resize(ng, ng + nf);
    for (Eigen::Index a = 0; a < ng; ++a) {
        for (Eigen::Index c = 0; c < ng; ++c)
            forming_rows_(a, c) = b_(forming_[a], forming_[c]);
        for (Eigen::Index c = 0; c < nf; ++c)
            forming_rows_(a, ng + c) = b_(forming_[a], free_[c]);
    }
    if (nf > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(b_ff);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::topology, "network: free-bus susceptance block is singular");
        free_inverse_ = llt.solve(Eigen::MatrixXd::Identity(nf, nf));
        free_coupling_ = -free_inverse_ * b_fg;
    }
    scratch_free_.resize(nf);
    scratch_angles_.resize(ng + nf);
}

void Network::solve(std::span<const double> forming_angle, std::span<const double> injection,
                    std::span<double> bus_angle, std::span<double> forming_power) const
{
    const auto nf = static_cast<Eigen::Index>(free_.size());
    const auto ng = static_cast<Eigen::Index>(forming_.size());
    Eigen::Map<const Eigen::VectorXd> theta_g(forming_angle.data(), ng);

    for (Eigen::Index a = 0; a < nf; ++a)
        scratch_free_(a) = injection[free_[a]];
    scratch_angles_.head(ng) = theta_g;
    if (nf > 0)
        scratch_angles_.tail(nf).noalias() = free_inverse_ * scratch_free_ + free_coupling_ * theta_g;

    for (Eigen::Index a = 0; a < ng; ++a)
        bus_angle[forming_[a]] = theta_g(a);
    for (Eigen::Index a = 0; a < nf; ++a)
        bus_angle[free_[a]] = scratch_angles_(ng + a);

    Eigen::Map<Eigen::VectorXd> p_g(forming_power.data(), ng);
    p_g.noalias() = forming_rows_ * scratch_angles_;
}

} // namespace gridtune::sim
