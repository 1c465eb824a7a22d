#include "sdgen/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace sdgen::datasets {

namespace {

constexpr double kToyAngleLo = -std::numbers::pi / 2.0;
constexpr double kToyAngleHi = 2.0 * std::numbers::pi / 5.0;
constexpr int kToyTrainAngles = 11;

const std::vector<double> kSimTemperatures = {20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40};
constexpr double kSimValidationTemp = 24.0;
constexpr double kSimTestTemp = 34.0;

// Comma-separated rows of doubles under a fixed header; '#' lines skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(line_no);
        auto fields = split_fields(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(where + ": expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i)
            row[i] = parse_double(fields[i], where);
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw InputError("'" + path + "' is empty");
    if (table.rows.empty()) throw InputError("'" + path + "' has a header but no data rows");
    return table;
}

void expect_header(const CsvTable& table, const std::vector<std::string>& expected,
                   const std::string& path) {
    if (table.header != expected) {
        std::string got;
        for (const auto& h : table.header) got += (got.empty() ? "" : ",") + h;
        throw ParseError(path + ": unexpected header '" + got + "'");
    }
}

std::string feature_column_name(const char* prefix, int width, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, index + 1);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    return os;
}

}  // namespace

Eigen::MatrixXd base_line(int n, double y_std, std::mt19937_64& rng) {
    if (n < 1) throw InputError("base_line: need a positive point count");
    if (y_std < 0.0) throw InputError("base_line: y_std must be non-negative");
    std::uniform_real_distribution<double> xdist(-1.0, 1.0);
    std::normal_distribution<double> ydist(0.0, 1.0);
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
        pts(i, 0) = xdist(rng);
        pts(i, 1) = y_std == 0.0 ? 0.0 : y_std * ydist(rng);
    }
    return pts;
}

Eigen::MatrixXd rotate(const Eigen::MatrixXd& points, double theta) {
    if (points.cols() != 2) throw ShapeError("rotate: points must be n x 2");
    if (!std::isfinite(theta)) throw InputError("rotate: non-finite angle");
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return points * rot.transpose();
}

std::vector<double> toy_train_angles() {
    std::vector<double> angles(kToyTrainAngles);
    const double step = (kToyAngleHi - kToyAngleLo) / (kToyTrainAngles - 1);
    for (int i = 0; i < kToyTrainAngles; ++i) angles[i] = kToyAngleLo + i * step;
    angles.back() = kToyAngleHi;
    return angles;
}

std::vector<double> sim_temperatures() {
    return kSimTemperatures;
}

namespace {

GroupedDataset generate_toy_groups(const std::vector<double>& angles, const ToyConfig& cfg,
                                   std::uint64_t stream_tag) {
    GroupedDataset groups;
    groups.reserve(angles.size());
    for (std::size_t i = 0; i < angles.size(); ++i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, (stream_tag << 32) | i));
        CodeGroup g;
        g.physical_code = angles[i];
        g.features = rotate(base_line(cfg.n_per_angle, cfg.y_std, rng), angles[i]);
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace

ToySplits make_toy_splits(const ToyConfig& cfg, int n_val_angles, int n_test_angles) {
    if (cfg.n_per_angle < 1) throw ConfigError("toy: n_per_angle must be positive");
    if (n_val_angles < 1 || n_test_angles < 1)
        throw ConfigError("toy: validation/test angle counts must be positive");

    const std::vector<double> train_angles = toy_train_angles();
    const int n_gaps = static_cast<int>(train_angles.size()) - 1;
    std::vector<double> midpoints(n_gaps);
    for (int i = 0; i < n_gaps; ++i)
        midpoints[i] = 0.5 * (train_angles[i] + train_angles[i + 1]);

    // validation takes even gaps, test odd ones; both stay interior
    std::vector<double> val_angles, test_angles;
    for (int i = 0; i < n_gaps && static_cast<int>(val_angles.size()) < n_val_angles; i += 2)
        val_angles.push_back(midpoints[i]);
    for (int i = 1; i < n_gaps && static_cast<int>(test_angles.size()) < n_test_angles; i += 2)
        test_angles.push_back(midpoints[i]);
    if (static_cast<int>(val_angles.size()) != n_val_angles ||
        static_cast<int>(test_angles.size()) != n_test_angles)
        throw ConfigError("toy: not enough training gaps for the requested split sizes");

    check_split_codes(train_angles, val_angles, test_angles);

    ToySplits splits;
    splits.angle_lo = train_angles.front();
    splits.angle_hi = train_angles.back();
    splits.train = generate_toy_groups(train_angles, cfg, 1);
    splits.validation = generate_toy_groups(val_angles, cfg, 2);
    splits.test = generate_toy_groups(test_angles, cfg, 3);
    assign_codes(splits.train, splits.angle_lo, splits.angle_hi);
    assign_codes(splits.validation, splits.angle_lo, splits.angle_hi);
    assign_codes(splits.test, splits.angle_lo, splits.angle_hi);
    return splits;
}

GroupedDataset group_by_code(const Eigen::VectorXd& physical_codes,
                             const Eigen::MatrixXd& features) {
    if (physical_codes.size() != features.rows())
        throw ShapeError("group_by_code: code/feature row mismatch");
    if (physical_codes.size() == 0) throw InputError("group_by_code: empty dataset");

    std::vector<double> order;
    std::map<double, std::vector<Eigen::Index>> rows_by_code;
    for (Eigen::Index r = 0; r < physical_codes.size(); ++r) {
        auto [it, inserted] = rows_by_code.try_emplace(physical_codes[r]);
        if (inserted) order.push_back(physical_codes[r]);
        it->second.push_back(r);
    }

    GroupedDataset groups;
    groups.reserve(order.size());
    for (double code : order) {
        const auto& rows = rows_by_code[code];
        CodeGroup g;
        g.physical_code = code;
        g.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) g.features.row(i) = features.row(rows[i]);
        groups.push_back(std::move(g));
    }
    return groups;
}

void assign_codes(GroupedDataset& groups, double lo, double hi) {
    if (!(hi > lo)) throw ConfigError("code range must have hi > lo");
    for (auto& g : groups) {
        g.code.resize(1);
        g.code[0] = 2.0 * (g.physical_code - lo) / (hi - lo) - 1.0;
    }
}

SimSplits make_sim_splits(const GroupedDataset& by_temperature) {
    if (by_temperature.size() != kSimTemperatures.size())
        throw InputError("simulation split expects exactly 11 temperature groups");
    auto find_group = [&](double temp) -> const CodeGroup& {
        for (const auto& g : by_temperature)
            if (std::abs(g.physical_code - temp) < 1e-6) return g;
        throw InputError("missing temperature group at " + format_full(temp) + " degC");
    };

    SimSplits splits;
    std::vector<double> train_codes;
    for (double temp : kSimTemperatures) {
        const CodeGroup& g = find_group(temp);
        if (std::abs(temp - kSimValidationTemp) < 1e-6)
            splits.validation.push_back(g);
        else if (std::abs(temp - kSimTestTemp) < 1e-6)
            splits.test.push_back(g);
        else {
            splits.train.push_back(g);
            train_codes.push_back(temp);
        }
    }
    check_split_codes(train_codes, {kSimValidationTemp}, {kSimTestTemp});
    return splits;
}

void check_split_codes(const std::vector<double>& train, const std::vector<double>& validation,
                       const std::vector<double>& test) {
    if (train.size() < 2) throw ConfigError("training split needs at least two codes");
    const double lo = *std::min_element(train.begin(), train.end());
    const double hi = *std::max_element(train.begin(), train.end());

    auto contains = [](const std::vector<double>& v, double x) {
        return std::any_of(v.begin(), v.end(), [&](double y) { return std::abs(x - y) < 1e-12; });
    };
    for (double v : validation) {
        if (contains(train, v) || contains(test, v))
            throw ConfigError("validation code " + format_full(v) + " overlaps another split");
        if (!(v > lo && v < hi))
            throw ConfigError("validation code " + format_full(v) + " is not interior to the training range");
    }
    for (double t : test) {
        if (contains(train, t))
            throw ConfigError("test code " + format_full(t) + " overlaps the training split");
        if (!(t > lo && t < hi))
            throw ConfigError("test code " + format_full(t) + " is not interior to the training range");
    }
}

void write_toy_csv(const std::string& path, const GroupedDataset& groups, const std::string& meta) {
    auto os = open_out(path);
    if (!meta.empty()) os << "# " << meta << '\n';
    os << "angle,x,y\n";
    for (const auto& g : groups) {
        for (Eigen::Index r = 0; r < g.features.rows(); ++r)
            os << format_full(g.physical_code) << ',' << format_full(g.features(r, 0)) << ','
               << format_full(g.features(r, 1)) << '\n';
    }
}

GroupedDataset read_toy_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    expect_header(table, {"angle", "x", "y"}, path);
    Eigen::VectorXd codes(table.rows.size());
    Eigen::MatrixXd features(table.rows.size(), 2);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        codes[static_cast<Eigen::Index>(r)] = table.rows[r][0];
        features(static_cast<Eigen::Index>(r), 0) = table.rows[r][1];
        features(static_cast<Eigen::Index>(r), 1) = table.rows[r][2];
    }
    return group_by_code(codes, features);
}

void write_sim_csv(const std::string& path,
                   const std::vector<dynsim::TransmissibilityFeature>& records,
                   const std::string& meta) {
    if (records.empty()) throw InputError("write_sim_csv: no records");
    const int n_features = static_cast<int>(records.front().values.size());
    auto os = open_out(path);
    if (!meta.empty()) os << "# " << meta << '\n';
    os << "temperature,humidity";
    for (int i = 0; i < n_features; ++i) os << ',' << feature_column_name("f_", 4, i);
    os << '\n';
    for (const auto& rec : records) {
        if (rec.values.size() != n_features)
            throw ShapeError("write_sim_csv: inconsistent feature lengths");
        os << format_full(rec.temperature) << ',' << format_full(rec.humidity);
        for (Eigen::Index i = 0; i < rec.values.size(); ++i) os << ',' << format_full(rec.values[i]);
        os << '\n';
    }
}

std::vector<dynsim::TransmissibilityFeature> read_sim_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 3 || table.header[0] != "temperature" || table.header[1] != "humidity")
        throw ParseError(path + ": expected 'temperature,humidity,f_...' header");
    const int n_features = static_cast<int>(table.header.size()) - 2;
    for (int i = 0; i < n_features; ++i)
        if (table.header[2 + i] != feature_column_name("f_", 4, i))
            throw ParseError(path + ": unexpected feature column '" + table.header[2 + i] + "'");

    std::vector<dynsim::TransmissibilityFeature> records(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        records[r].temperature = table.rows[r][0];
        records[r].humidity = table.rows[r][1];
        records[r].values =
            Eigen::Map<const Eigen::VectorXd>(table.rows[r].data() + 2, n_features);
    }
    return records;
}

void write_projected_csv(const std::string& path, const Eigen::VectorXd& temperatures,
                         const Eigen::MatrixXd& scores, const std::string& meta) {
    if (temperatures.size() != scores.rows())
        throw ShapeError("write_projected_csv: temperature/score row mismatch");
    auto os = open_out(path);
    if (!meta.empty()) os << "# " << meta << '\n';
    os << "temperature";
    for (int i = 0; i < scores.cols(); ++i) os << ',' << feature_column_name("p_", 3, i);
    os << '\n';
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        os << format_full(temperatures[r]);
        for (Eigen::Index c = 0; c < scores.cols(); ++c) os << ',' << format_full(scores(r, c));
        os << '\n';
    }
}

GroupedDataset read_projected_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "temperature")
        throw ParseError(path + ": expected 'temperature,p_...' header");
    const int n_features = static_cast<int>(table.header.size()) - 1;
    for (int i = 0; i < n_features; ++i)
        if (table.header[1 + i] != feature_column_name("p_", 3, i))
            throw ParseError(path + ": unexpected score column '" + table.header[1 + i] + "'");

    Eigen::VectorXd codes(table.rows.size());
    Eigen::MatrixXd features(table.rows.size(), n_features);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        codes[static_cast<Eigen::Index>(r)] = table.rows[r][0];
        for (int c = 0; c < n_features; ++c)
            features(static_cast<Eigen::Index>(r), c) = table.rows[r][1 + c];
    }
    return group_by_code(codes, features);
}

void write_split_manifest(const std::string& path, const SplitManifest& manifest,
                          const std::string& meta) {
    auto os = open_out(path);
    if (!meta.empty()) os << "# " << meta << '\n';
    os << "SPLITSv1 " << manifest.experiment << '\n';
    os << "code_lo " << format_full(manifest.code_lo) << '\n';
    os << "code_hi " << format_full(manifest.code_hi) << '\n';
    auto write_list = [&](const char* name, const std::vector<double>& values) {
        os << name;
        for (double v : values) os << ' ' << format_full(v);
        os << '\n';
    };
    write_list("train", manifest.train);
    write_list("validation", manifest.validation);
    write_list("test", manifest.test);
}

SplitManifest read_split_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    SplitManifest manifest;
    std::string line;
    bool saw_header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (!saw_header) {
            if (tag != "SPLITSv1" || !(ss >> manifest.experiment))
                throw ParseError(path + ": bad manifest header '" + line + "'");
            saw_header = true;
            continue;
        }
        auto read_values = [&]() {
            std::vector<double> values;
            std::string tok;
            while (ss >> tok) values.push_back(parse_double(tok, path));
            return values;
        };
        auto read_one = [&]() {
            std::string tok;
            if (!(ss >> tok)) throw ParseError(path + ": missing value after '" + tag + "'");
            return parse_double(tok, path);
        };
        if (tag == "code_lo") {
            manifest.code_lo = read_one();
        } else if (tag == "code_hi") {
            manifest.code_hi = read_one();
        } else if (tag == "train") {
            manifest.train = read_values();
        } else if (tag == "validation") {
            manifest.validation = read_values();
        } else if (tag == "test") {
            manifest.test = read_values();
        } else {
            throw ParseError(path + ": unknown manifest tag '" + tag + "'");
        }
    }
    if (!saw_header) throw ParseError(path + ": missing SPLITSv1 header");
    if (manifest.train.empty()) throw ParseError(path + ": manifest has no training codes");
    return manifest;
}

}  // namespace sdgen::datasets
