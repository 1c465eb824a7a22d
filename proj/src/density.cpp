#include "sdgen/density.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace sdgen::density {

namespace {

// K(i, j) = exp(-(axis[i] - points(j, axis_index))^2 / (2 h^2))
Eigen::MatrixXd axis_kernel(const Eigen::VectorXd& axis_values, const Eigen::MatrixXd& points,
                            int axis_index, double bandwidth) {
    const Eigen::Index res = axis_values.size();
    const Eigen::Index n = points.rows();
    const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::MatrixXd K(res, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double p = points(j, axis_index);
        K.col(j) = (-(axis_values.array() - p).square() * inv2h2).exp();
    }
    return K;
}

}  // namespace

Eigen::Index EvalGrid::total_cells() const {
    Eigen::Index total = 1;
    for (const auto& a : axes) total *= a.resolution;
    return total;
}

Eigen::VectorXd EvalGrid::axis_values(int axis) const {
    const Axis& a = axes.at(axis);
    if (a.resolution < 2) throw ConfigError("grid axis needs at least 2 points");
    if (!(a.upper > a.lower)) throw ConfigError("grid axis upper bound must exceed lower");
    return Eigen::VectorXd::LinSpaced(a.resolution, a.lower, a.upper);
}

Eigen::MatrixXd EvalGrid::points() const {
    const int d = dim();
    const Eigen::Index total = total_cells();
    std::vector<Eigen::VectorXd> values;
    values.reserve(d);
    for (int a = 0; a < d; ++a) values.push_back(axis_values(a));

    Eigen::MatrixXd pts(total, d);
    std::vector<Eigen::Index> idx(d, 0);
    for (Eigen::Index cell = 0; cell < total; ++cell) {
        for (int a = 0; a < d; ++a) pts(cell, a) = values[a][idx[a]];
        for (int a = d - 1; a >= 0; --a) {  // last axis fastest
            if (++idx[a] < values[a].size()) break;
            idx[a] = 0;
        }
    }
    return pts;
}

EvalGrid EvalGrid::uniform(int dim, double lower, double upper, int resolution) {
    if (dim < 1) throw ConfigError("grid needs at least one axis");
    EvalGrid g;
    g.axes.assign(dim, Axis{lower, upper, resolution});
    return g;
}

KdeModel kde_fit(const Eigen::MatrixXd& points, double bandwidth) {
    if (points.rows() == 0) throw InputError("kde_fit: empty point set");
    if (!(bandwidth > 0.0)) throw InputError("kde_fit: bandwidth must be positive");
    return KdeModel{points, bandwidth};
}

Eigen::VectorXd kde_density(const KdeModel& model, const Eigen::MatrixXd& queries) {
    if (queries.cols() != model.points.cols())
        throw ShapeError("query dimension does not match KDE points");
    const Eigen::Index n = model.points.rows();
    const int d = static_cast<int>(model.points.cols());
    const double h2 = model.bandwidth * model.bandwidth;
    const double norm = std::pow(2.0 * std::numbers::pi * h2, -0.5 * d) / static_cast<double>(n);

    Eigen::VectorXd out(queries.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        const auto diff = model.points.rowwise() - queries.row(q);
        out[q] = norm * (-diff.rowwise().squaredNorm().array() / (2.0 * h2)).exp().sum();
    }
    return out;
}

Eigen::VectorXd eval_on_grid(const KdeModel& model, const EvalGrid& grid) {
    const int d = grid.dim();
    if (d != model.points.cols())
        throw ShapeError("grid dimension does not match KDE points");
    if (d > 3) throw ConfigError("grids beyond 3 axes are not supported");

    const Eigen::Index n = model.points.rows();
    const double h2 = model.bandwidth * model.bandwidth;
    const double norm = std::pow(2.0 * std::numbers::pi * h2, -0.5 * d) / static_cast<double>(n);

    // Per-axis kernel tables; the product over axes factorizes the
    // d-dimensional Gaussian, so accumulation reduces to matrix products.
    std::vector<Eigen::MatrixXd> K;
    K.reserve(d);
    for (int a = 0; a < d; ++a)
        K.push_back(axis_kernel(grid.axis_values(a), model.points, a, model.bandwidth));

    Eigen::VectorXd dens(grid.total_cells());
    if (d == 1) {
        dens = K[0].rowwise().sum();
    } else if (d == 2) {
        // column i0 of D holds the axis-1 sweep for that cell block, so the
        // column-major flattening below is exactly C order (axis 1 fastest)
        Eigen::MatrixXd D = K[1] * K[0].transpose();  // res1 x res0
        dens = Eigen::Map<Eigen::VectorXd>(D.data(), D.size());
    } else {
        const Eigen::Index r0 = K[0].rows(), r1 = K[1].rows(), r2 = K[2].rows();
        for (Eigen::Index i0 = 0; i0 < r0; ++i0) {
            Eigen::MatrixXd weighted = K[1].array().rowwise() * K[0].row(i0).array();
            Eigen::MatrixXd slice = weighted * K[2].transpose();  // r1 x r2
            for (Eigen::Index i1 = 0; i1 < r1; ++i1)
                dens.segment((i0 * r1 + i1) * r2, r2) = slice.row(i1).transpose();
        }
    }
    dens *= norm;

    const double total = dens.sum();
    if (!(total > 0.0))
        throw CoverageError("KDE mass vanishes on the evaluation grid; points lie outside bounds");
    return dens / total;
}

double kl_divergence(const Eigen::VectorXd& P, const Eigen::VectorXd& Q, double epsilon) {
    if (P.size() != Q.size()) throw ShapeError("KL: distribution length mismatch");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < P.size(); ++i) {
        if (P[i] > 0.0) kl += P[i] * std::log(P[i] / std::max(Q[i], epsilon));
    }
    return kl;
}

KlReport cumulative_validation_kl(const Sampler& generate, const GroupedDataset& validation,
                                  const EvalGrid& grid, double bandwidth, int n_generate,
                                  std::mt19937_64& rng) {
    if (validation.empty()) throw InputError("validation set has no code groups");
    if (n_generate < 1) throw InputError("n_generate must be positive");

    KlReport report;
    report.n_val = static_cast<int>(validation.size());
    for (const auto& group : validation) {
        if (group.features.rows() == 0)
            throw InputError("validation group with empty point set");
        const Eigen::MatrixXd generated = generate(group.code, n_generate, rng);
        const Eigen::VectorXd P = eval_on_grid(kde_fit(group.features, bandwidth), grid);
        const Eigen::VectorXd Q = eval_on_grid(kde_fit(generated, bandwidth), grid);
        const double kl = kl_divergence(P, Q);
        report.per_code.emplace_back(group.physical_code, kl);
        report.cumulative += kl;
    }
    return report;
}

void save_kl_report(const std::string& path, const KlReport& report, const std::string& meta) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    if (!meta.empty()) os << "# " << meta << '\n';
    os << "code,kl\n";
    for (const auto& [code, kl] : report.per_code)
        os << format_full(code) << ',' << format_full(kl) << '\n';
    os << "TOTAL," << format_full(report.cumulative) << '\n';
}

}  // namespace sdgen::density
