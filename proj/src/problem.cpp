#include "nearq/problem.hpp"

#include "nearq/error.hpp"
#include "nearq/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nearq {

namespace {

std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    const auto &ev = solver.eigenvalues();    // ascending
    return {ev(0), ev(ev.size() - 1)};
}

}    // namespace

QuadraticProblem::QuadraticProblem(std::vector<Eigen::MatrixXd> a, std::vector<Eigen::VectorXd> b, std::uint64_t seed,
                                   double kappa)
    : seed_(seed), kappa_(kappa), a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty()) throw ConfigError("problem needs at least one node");
    if (a_.size() != b_.size()) throw DimensionError("A and b lists differ in length");
    p_ = static_cast<std::size_t>(a_[0].rows());
    if (p_ == 0) throw DimensionError("problem dimension must be positive");

    const auto n = a_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(a_[i].rows()) != p_ || static_cast<std::size_t>(a_[i].cols()) != p_ ||
            static_cast<std::size_t>(b_[i].size()) != p_)
            throw DimensionError("node " + std::to_string(i) + " has inconsistent dimensions");
        if ((a_[i] - a_[i].transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, a_[i].cwiseAbs().maxCoeff()))
            throw ConfigError("A_" + std::to_string(i) + " is not symmetric");
        auto [lo, hi] = extreme_eigenvalues(a_[i]);
        if (!(lo > 0.0)) throw ConfigError("A_" + std::to_string(i) + " is not positive definite");
        strong_.push_back(lo);
        lipschitz_.push_back(hi);
        u_star_.push_back(-a_[i].ldlt().solve(b_[i]));
    }
    max_lipschitz_ = *std::max_element(lipschitz_.begin(), lipschitz_.end());
    for (std::size_t i = 0; i < n; ++i) {
        mu_fbar_ += strong_[i];
        l_fbar_ += lipschitz_[i];
    }
    mu_fbar_ /= static_cast<double>(n);
    l_fbar_ /= static_cast<double>(n);

    x_star_ = global_optimum(*this);

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p_, p_);
    for (const auto &ai : a_) sum += ai;
    auto [lo, hi] = extreme_eigenvalues(sum);
    global_condition_ = hi / lo;
}

std::vector<double> QuadraticProblem::stacked_local_minimizers() const {
    std::vector<double> out;
    out.reserve(nodes() * p_);
    for (const auto &u : u_star_) out.insert(out.end(), u.data(), u.data() + u.size());
    return out;
}

std::string QuadraticProblem::serialize() const {
    std::string out = "nearq-problem 1\n";
    out += "n " + std::to_string(nodes()) + "\n";
    out += "p " + std::to_string(p_) + "\n";
    out += "seed " + std::to_string(seed_) + "\n";
    out += "kappa " + text_io::format_double(kappa_) + "\n";
    for (std::size_t i = 0; i < nodes(); ++i) {
        out += "A " + std::to_string(i) + "\n";
        for (std::size_t r = 0; r < p_; ++r) {
            for (std::size_t c = 0; c < p_; ++c) {
                if (c) out.push_back(',');
                out += text_io::format_double(a_[i](r, c));
            }
            out.push_back('\n');
        }
        out += "b " + std::to_string(i) + "\n";
        out += text_io::join_doubles(b_[i].data(), p_) + "\n";
    }
    out += "end\n";
    return out;
}

QuadraticProblem QuadraticProblem::deserialize(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    auto next = [&](const char *what) {
        if (!std::getline(in, line)) throw ConfigError(std::string("problem file truncated before ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto keyed = [&](const std::string &key) {
        auto l = next(key.c_str());
        if (!l.starts_with(key + " ")) throw ConfigError("problem file: expected '" + key + "', got '" + l + "'");
        return l.substr(key.size() + 1);
    };

    if (next("header") != "nearq-problem 1") throw ConfigError("not a nearq problem file (version 1)");
    const auto n = std::stoul(keyed("n"));
    const auto p = std::stoul(keyed("p"));
    const auto seed = std::stoull(keyed("seed"));
    const double kappa = text_io::parse_double(keyed("kappa"));

    std::vector<Eigen::MatrixXd> a;
    std::vector<Eigen::VectorXd> b;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::stoul(keyed("A")) != i) throw ConfigError("problem file: node blocks out of order");
        Eigen::MatrixXd ai(p, p);
        for (std::size_t r = 0; r < p; ++r) {
            next("A row");
            auto cells = text_io::split(line, ',');
            if (cells.size() != p) throw ConfigError("problem file: bad row width in A_" + std::to_string(i));
            for (std::size_t c = 0; c < p; ++c) ai(r, c) = text_io::parse_double(cells[c]);
        }
        if (std::stoul(keyed("b")) != i) throw ConfigError("problem file: node blocks out of order");
        next("b row");
        auto cells = text_io::split(line, ',');
        if (cells.size() != p) throw ConfigError("problem file: bad width in b_" + std::to_string(i));
        Eigen::VectorXd bi(p);
        for (std::size_t c = 0; c < p; ++c) bi(c) = text_io::parse_double(cells[c]);
        a.push_back(std::move(ai));
        b.push_back(std::move(bi));
    }
    if (next("end") != "end") throw ConfigError("problem file: missing end marker");
    return QuadraticProblem(std::move(a), std::move(b), seed, kappa);
}

QuadraticProblem generate_quadratic(std::size_t n, std::size_t p, double kappa, std::uint64_t seed) {
    if (n < 1 || p < 1) throw ConfigError("generate_quadratic: n and p must be >= 1");
    if (!(kappa >= 1.0)) throw ConfigError("generate_quadratic: kappa must be >= 1");
    if (p == 1 && kappa > 1.0) throw ConfigError("generate_quadratic: p = 1 cannot realize kappa > 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double log_kappa = std::log(kappa);

    std::vector<Eigen::MatrixXd> a;
    std::vector<Eigen::VectorXd> b;
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd g(p, p);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t c = 0; c < p; ++c) g(r, c) = normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
        const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
        for (std::size_t c = 0; c < p; ++c)
            if (rmat(c, c) < 0.0) q.col(c) = -q.col(c);

        std::vector<double> eig(p);
        for (auto &e : eig) e = std::exp(uniform(rng) * log_kappa);
        std::sort(eig.begin(), eig.end());
        if (i == 0) {
            eig.front() = 1.0;
            eig.back() = kappa;
        }
        Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(eig.data(), static_cast<Eigen::Index>(p));
        Eigen::MatrixXd ai = q * d.asDiagonal() * q.transpose();
        ai = 0.5 * (ai + ai.transpose()).eval();

        Eigen::VectorXd bi(p);
        for (std::size_t c = 0; c < p; ++c) bi(c) = normal(rng);
        a.push_back(std::move(ai));
        b.push_back(std::move(bi));
    }
    return QuadraticProblem(std::move(a), std::move(b), seed, kappa);
}

void local_gradient_into(const QuadraticProblem &prob, std::size_t i, std::span<const double> x_i,
                         std::span<double> out) {
    const auto p = prob.dim();
    if (i >= prob.nodes()) throw DimensionError("local_gradient: node index out of range");
    if (x_i.size() != p || out.size() != p) throw DimensionError("local_gradient: expected a p-vector");
    const auto &a = prob.a(i);
    const auto &b = prob.b(i);
    for (std::size_t r = 0; r < p; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < p; ++c) acc += a(r, c) * x_i[c];
        out[r] = acc + b(r);
    }
}

std::vector<double> local_gradient(const QuadraticProblem &prob, std::size_t i, std::span<const double> x_i) {
    std::vector<double> out(prob.dim());
    local_gradient_into(prob, i, x_i, out);
    return out;
}

Eigen::VectorXd global_optimum(const QuadraticProblem &prob) {
    const auto p = prob.dim();
    Eigen::MatrixXd a_sum = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < prob.nodes(); ++i) {
        a_sum += prob.a(i);
        b_sum += prob.b(i);
    }
    const auto ldlt = a_sum.ldlt();
    Eigen::VectorXd x = ldlt.solve(-b_sum);
    // One step of iterative refinement keeps the residual at rounding level.
    x += ldlt.solve(-b_sum - a_sum * x);
    const double scale = std::max(1.0, b_sum.norm());
    if ((a_sum * x + b_sum).norm() > 1e-10 * scale) throw std::runtime_error("global_optimum: solve failed");
    return x;
}

}    // namespace nearq
