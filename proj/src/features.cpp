#include "sdgen/features.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <sstream>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace sdgen::features {

NormalizationModel fit_normalizer(const Eigen::MatrixXd& data) {
    if (data.rows() == 0 || data.cols() == 0)
        throw InputError("fit_normalizer: empty data");
    NormalizationModel model;
    model.min = data.colwise().minCoeff();
    model.max = data.colwise().maxCoeff();
    model.constant.resize(data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c)
        model.constant[c] = (model.max[c] == model.min[c]);
    return model;
}

Eigen::MatrixXd normalize(const Eigen::MatrixXd& data, const NormalizationModel& model) {
    if (data.cols() != model.dim())
        throw ShapeError("normalize: column count does not match model");
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        if (model.constant[c]) {
            out.col(c).setZero();
        } else {
            const double span = model.max[c] - model.min[c];
            out.col(c) = 2.0 * (data.col(c).array() - model.min[c]) / span - 1.0;
        }
    }
    return out;
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& data, const NormalizationModel& model) {
    if (data.cols() != model.dim())
        throw ShapeError("denormalize: column count does not match model");
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        if (model.constant[c]) {
            out.col(c).setConstant(model.min[c]);
        } else {
            const double span = model.max[c] - model.min[c];
            out.col(c) = (data.col(c).array() + 1.0) * 0.5 * span + model.min[c];
        }
    }
    return out;
}

PcaModel fit_pca(const Eigen::MatrixXd& data, int n_components) {
    const Eigen::Index n = data.rows();
    const Eigen::Index p = data.cols();
    if (n == 0 || p == 0) throw InputError("fit_pca: empty data");
    if (n_components < 1 || n_components > std::min(n, p))
        throw ConfigError("fit_pca: n_components must be in [1, min(rows, cols)]");
    if (n < 2) throw ConfigError("fit_pca: need at least 2 rows");

    PcaModel model;
    model.mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw NumericError("fit_pca: eigendecomposition failed");

    // Solver returns ascending eigenvalues; keep the top ones, descending.
    model.eigenvalues.resize(n_components);
    model.components.resize(n_components, p);
    for (int k = 0; k < n_components; ++k) {
        const Eigen::Index src = p - 1 - k;
        model.eigenvalues[k] = solver.eigenvalues()[src];
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        model.components.row(k) = v.transpose();
    }
    return model;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& data, const PcaModel& model) {
    if (data.cols() != model.n_features())
        throw ShapeError("project: column count does not match PCA model");
    return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores, const PcaModel& model) {
    if (scores.cols() != model.n_components())
        throw ShapeError("reconstruct: column count does not match PCA model");
    return (scores * model.components).rowwise() + model.mean.transpose();
}

void save_pca(const std::string& path, const PcaModel& model) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    os << "PCAv1 " << model.n_features() << ' ' << model.n_components() << '\n';
    write_row(os, model.mean.transpose());
    write_row(os, model.eigenvalues.transpose());
    for (Eigen::Index k = 0; k < model.n_components(); ++k)
        write_row(os, model.components.row(k));
}

PcaModel load_pca(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw ParseError(path + ": missing PCAv1 header");
    std::istringstream header(line);
    std::string magic;
    long n_features = 0, n_components = 0;
    if (!(header >> magic >> n_features >> n_components) || magic != "PCAv1" ||
        n_features < 1 || n_components < 1)
        throw ParseError(path + ": bad PCAv1 header '" + line + "'");

    auto read_line = [&](const char* what) {
        if (!std::getline(is, line)) throw ParseError(path + ": truncated before " + what);
        return parse_double_row(line, path);
    };

    PcaModel model;
    auto mean = read_line("mean");
    if (static_cast<long>(mean.size()) != n_features)
        throw ParseError(path + ": mean line has wrong length");
    model.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n_features);

    auto eig = read_line("eigenvalues");
    if (static_cast<long>(eig.size()) != n_components)
        throw ParseError(path + ": eigenvalue line has wrong length");
    model.eigenvalues = Eigen::Map<const Eigen::VectorXd>(eig.data(), n_components);

    model.components.resize(n_components, n_features);
    for (long k = 0; k < n_components; ++k) {
        auto row = read_line("component row");
        if (static_cast<long>(row.size()) != n_features)
            throw ParseError(path + ": component row " + std::to_string(k) + " has wrong length");
        model.components.row(k) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), n_features);
    }
    return model;
}

void save_normalizer(const std::string& path, const NormalizationModel& model) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    os << "NORMv1 " << model.dim() << '\n';
    write_row(os, model.min.transpose());
    write_row(os, model.max.transpose());
}

NormalizationModel load_normalizer(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw ParseError(path + ": missing NORMv1 header");
    std::istringstream header(line);
    std::string magic;
    long dim = 0;
    if (!(header >> magic >> dim) || magic != "NORMv1" || dim < 1)
        throw ParseError(path + ": bad NORMv1 header '" + line + "'");

    NormalizationModel model;
    if (!std::getline(is, line)) throw ParseError(path + ": truncated before min line");
    auto mn = parse_double_row(line, path);
    if (!std::getline(is, line)) throw ParseError(path + ": truncated before max line");
    auto mx = parse_double_row(line, path);
    if (static_cast<long>(mn.size()) != dim || static_cast<long>(mx.size()) != dim)
        throw ParseError(path + ": min/max line has wrong length");
    model.min = Eigen::Map<const Eigen::VectorXd>(mn.data(), dim);
    model.max = Eigen::Map<const Eigen::VectorXd>(mx.data(), dim);
    model.constant.resize(dim);
    for (long c = 0; c < dim; ++c) model.constant[c] = (model.max[c] == model.min[c]);
    return model;
}

}  // namespace sdgen::features
