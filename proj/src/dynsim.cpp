#include "sdgen/dynsim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace sdgen::dynsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Eigen::VectorXd FrequencyGrid::hertz() const {
    return omegas / kTwoPi;
}

ChainSystem make_uniform_chain(int n_dof, double stiffness, double damping, double mass) {
    if (n_dof < 1) throw ConfigError("chain needs at least one mass");
    ChainSystem sys;
    sys.masses = Eigen::VectorXd::Constant(n_dof, mass);
    sys.stiffnesses = Eigen::VectorXd::Constant(n_dof, stiffness);
    sys.dampings = Eigen::VectorXd::Constant(n_dof, damping);
    validate(sys);
    return sys;
}

void validate(const ChainSystem& sys) {
    const auto n = sys.masses.size();
    if (n == 0 || sys.stiffnesses.size() != n || sys.dampings.size() != n)
        throw ConfigError("chain parameter vectors must share one positive length");
    if ((sys.masses.array() <= 0.0).any() || (sys.stiffnesses.array() <= 0.0).any() ||
        (sys.dampings.array() <= 0.0).any())
        throw InputError("chain masses, stiffnesses and dampings must be strictly positive");
}

ChainSystem apply_environment(const ChainSystem& base, const EnvironmentalState& env) {
    validate(base);
    if (!std::isfinite(env.temperature) || !std::isfinite(env.humidity))
        throw InputError("environmental state must be finite");
    const double k_scale = 1.0 - (env.temperature - 30.0) / 100.0;
    const double c_scale = 1.0 - (env.humidity - 90.0) / 100.0;
    if (k_scale <= 0.0 || c_scale <= 0.0)
        throw InputError("environment drives stiffness or damping non-positive");
    ChainSystem out = base;
    out.stiffnesses *= k_scale;
    out.dampings *= c_scale;
    return out;
}

SystemMatrices assemble_matrices(const ChainSystem& sys) {
    validate(sys);
    const int n = sys.n_dof();
    SystemMatrices mats;
    mats.M = sys.masses.asDiagonal();
    mats.K = Eigen::MatrixXd::Zero(n, n);
    mats.C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        mats.K(i, i) = sys.stiffnesses[i];
        mats.C(i, i) = sys.dampings[i];
        if (i + 1 < n) {
            mats.K(i, i) += sys.stiffnesses[i + 1];
            mats.K(i, i + 1) = -sys.stiffnesses[i + 1];
            mats.K(i + 1, i) = -sys.stiffnesses[i + 1];
            mats.C(i, i) += sys.dampings[i + 1];
            mats.C(i, i + 1) = -sys.dampings[i + 1];
            mats.C(i + 1, i) = -sys.dampings[i + 1];
        }
    }
    return mats;
}

FrequencyGrid linear_frequency_grid(double f_min_hz, double f_max_hz, int n_points) {
    if (n_points < 2 || f_min_hz <= 0.0 || f_max_hz <= f_min_hz)
        throw ConfigError("frequency grid needs 0 < f_min < f_max and >= 2 points");
    FrequencyGrid grid;
    grid.omegas = Eigen::VectorXd::LinSpaced(n_points, f_min_hz, f_max_hz) * kTwoPi;
    return grid;
}

Eigen::MatrixXcd frf(const ChainSystem& sys, const FrequencyGrid& grid, int force_dof) {
    const int n = sys.n_dof();
    if (force_dof < 0 || force_dof >= n) throw InputError("force_dof out of range");
    if (grid.size() == 0 || (grid.omegas.array() <= 0.0).any())
        throw ConfigError("frequency grid must be strictly positive");

    const SystemMatrices mats = assemble_matrices(sys);
    Eigen::VectorXcd ef = Eigen::VectorXcd::Zero(n);
    ef[force_dof] = 1.0;

    Eigen::MatrixXcd H(n, grid.size());
    for (Eigen::Index w = 0; w < grid.size(); ++w) {
        const double omega = grid.omegas[w];
        Eigen::MatrixXcd dyn =
            (mats.K - omega * omega * mats.M).cast<std::complex<double>>() +
            std::complex<double>(0.0, omega) * mats.C.cast<std::complex<double>>();
        H.col(w) = Eigen::PartialPivLU<Eigen::MatrixXcd>(dyn).solve(ef);
    }
    if (!H.allFinite())
        throw NumericError("frf: singular dynamic stiffness (non-positive damping?)");
    return H;
}

Eigen::VectorXd transmissibility(const Eigen::MatrixXcd& H, int i, int j) {
    if (i < 0 || j < 0 || i >= H.rows() || j >= H.rows())
        throw InputError("transmissibility dof out of range");
    const Eigen::VectorXd denom = H.row(j).cwiseAbs().transpose();
    if ((denom.array() == 0.0).any())
        throw NumericError("transmissibility: zero response in the denominator dof");
    return H.row(i).cwiseAbs().transpose().cwiseQuotient(denom);
}

Eigen::VectorXd pollute(const Eigen::VectorXd& values, double fraction, std::mt19937_64& rng) {
    if (fraction < 0.0) throw InputError("pollution fraction must be non-negative");
    if (fraction == 0.0 || values.size() == 0) return values;
    const double mean = values.mean();
    const double sigma =
        std::sqrt((values.array() - mean).square().sum() / static_cast<double>(values.size()));
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
        out[i] = values[i] + fraction * sigma * noise(rng);
    return out;
}

std::vector<TransmissibilityFeature> build_dataset(const ChainSystem& base,
                                                   const std::vector<double>& temperatures,
                                                   int n_per_temp, double humidity_lo,
                                                   double humidity_hi, const FrequencyGrid& grid,
                                                   double noise_fraction, std::uint64_t seed) {
    validate(base);
    if (base.n_dof() < 3) throw ConfigError("transmissibility features need at least 3 masses");
    if (temperatures.empty()) throw InputError("no temperatures requested");
    if (n_per_temp < 1) throw InputError("n_per_temp must be positive");
    if (humidity_hi < humidity_lo) throw InputError("empty humidity range");

    std::vector<TransmissibilityFeature> records;
    records.reserve(temperatures.size() * static_cast<std::size_t>(n_per_temp));
    for (std::size_t t = 0; t < temperatures.size(); ++t) {
        for (int d = 0; d < n_per_temp; ++d) {
            std::mt19937_64 rng(
                derive_seed(seed, (static_cast<std::uint64_t>(t) << 32) | static_cast<std::uint64_t>(d)));
            std::uniform_real_distribution<double> hdist(humidity_lo, humidity_hi);
            const double humidity = (humidity_lo == humidity_hi) ? humidity_lo : hdist(rng);

            const ChainSystem sys =
                apply_environment(base, EnvironmentalState{temperatures[t], humidity});
            const Eigen::MatrixXcd H = frf(sys, grid, 0);
            Eigen::VectorXd t21 = pollute(transmissibility(H, 1, 0), noise_fraction, rng);
            Eigen::VectorXd t32 = pollute(transmissibility(H, 2, 1), noise_fraction, rng);

            TransmissibilityFeature rec;
            rec.temperature = temperatures[t];
            rec.humidity = humidity;
            rec.values.resize(t21.size() + t32.size());
            // fold polluted magnitudes positive so the log pipeline stays defined
            rec.values << t21.cwiseAbs().cwiseMax(1e-12), t32.cwiseAbs().cwiseMax(1e-12);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

Eigen::MatrixXd integrate_time(const ChainSystem& sys, int force_dof,
                               const Eigen::VectorXd& force, double dt) {
    validate(sys);
    const int n = sys.n_dof();
    if (force_dof < 0 || force_dof >= n) throw InputError("force_dof out of range");
    if (!(dt > 0.0)) throw InputError("time step must be positive");
    if (!force.allFinite()) throw InputError("force series contains non-finite values");
    const Eigen::Index n_steps = force.size();

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n_steps);
    if (n_steps == 0) return x;

    const SystemMatrices mats = assemble_matrices(sys);

    // average acceleration: beta = 1/4, gamma = 1/2
    const double a0c = 4.0 / (dt * dt);  // 1/(beta dt^2)
    const double a1c = 2.0 / dt;         // gamma/(beta dt)
    const Eigen::MatrixXd k_eff = mats.K + a1c * mats.C + a0c * mats.M;
    const Eigen::LDLT<Eigen::MatrixXd> solver(k_eff);

    Eigen::VectorXd ef = Eigen::VectorXd::Zero(n);
    ef[force_dof] = 1.0;

    Eigen::VectorXd xn = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd vn = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd an = sys.masses.cwiseInverse().asDiagonal() * (ef * force[0]);

    for (Eigen::Index step = 1; step < n_steps; ++step) {
        const Eigen::VectorXd rhs = ef * force[step] +
                                    mats.M * (a0c * xn + (4.0 / dt) * vn + an) +
                                    mats.C * (a1c * xn + vn);
        const Eigen::VectorXd xn1 = solver.solve(rhs);
        const Eigen::VectorXd an1 = a0c * (xn1 - xn) - (4.0 / dt) * vn - an;
        const Eigen::VectorXd vn1 = vn + 0.5 * dt * (an + an1);
        xn = xn1;
        vn = vn1;
        an = an1;
        x.col(step) = xn;
    }
    return x;
}

Eigen::VectorXd uniform_chain_natural_frequencies(double stiffness, double mass, int n_dof) {
    if (n_dof < 1 || stiffness <= 0.0 || mass <= 0.0)
        throw ConfigError("natural frequencies need positive k, m and n_dof");
    Eigen::VectorXd omegas(n_dof);
    const double base = 2.0 * std::sqrt(stiffness / mass);
    for (int j = 1; j <= n_dof; ++j)
        omegas[j - 1] =
            base * std::sin((2.0 * j - 1.0) * std::numbers::pi / (2.0 * (2.0 * n_dof + 1.0)));
    return omegas;
}

double first_peak_frequency(const Eigen::VectorXd& values, const Eigen::VectorXd& freqs,
                            double rel_height) {
    if (values.size() != freqs.size()) throw ShapeError("values/frequency length mismatch");
    if (values.size() < 3) throw InputError("need at least 3 samples to locate a peak");
    const double threshold = rel_height * values.maxCoeff();
    for (Eigen::Index i = 1; i + 1 < values.size(); ++i) {
        if (values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] >= threshold) {
            // parabolic refinement around the discrete maximum
            const double denom = values[i - 1] - 2.0 * values[i] + values[i + 1];
            double shift = 0.0;
            if (denom < 0.0) shift = 0.5 * (values[i - 1] - values[i + 1]) / denom;
            shift = std::clamp(shift, -0.5, 0.5);
            return freqs[i] + shift * (freqs[i + 1] - freqs[i]);
        }
    }
    throw InputError("no qualifying peak in the curve");
}

}  // namespace sdgen::dynsim
