#include "mesbm/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mesbm/fusion.hpp"
#include "mesbm/shape.hpp"

namespace mesbm {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[noreturn]] void fail_at(const std::string& file, size_t line, const std::string& what) {
    throw DataError(file + ":" + std::to_string(line) + ": " + what);
}

// Splits one CSV line on commas; the formats written here never quote.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

struct CsvReader {
    std::string path;
    std::ifstream stream;
    size_t line_number = 0;

    explicit CsvReader(const std::string& p) : path(p), stream(p) {
        if (!stream) throw DataError("cannot open " + p);
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(stream, line)) {
            ++line_number;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields = split_csv(line);
            return true;
        }
        return false;
    }

    void expect_header(const std::string& header) {
        std::vector<std::string> fields;
        if (!next(fields)) fail_at(path, line_number, "missing header '" + header + "'");
        std::string joined;
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) joined += ',';
            joined += fields[i];
        }
        if (joined != header) {
            fail_at(path, line_number, "expected header '" + header + "', found '" + joined + "'");
        }
    }
};

double parse_double(const CsvReader& reader, const std::string& text) {
    size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        fail_at(reader.path, reader.line_number, "not a number: '" + text + "'");
    }
    if (used != text.size()) {
        fail_at(reader.path, reader.line_number, "not a number: '" + text + "'");
    }
    return value;
}

long parse_long(const CsvReader& reader, const std::string& text) {
    size_t used = 0;
    long value = 0;
    try {
        value = std::stol(text, &used);
    } catch (const std::exception&) {
        fail_at(reader.path, reader.line_number, "not an integer: '" + text + "'");
    }
    if (used != text.size()) {
        fail_at(reader.path, reader.line_number, "not an integer: '" + text + "'");
    }
    return value;
}

ordered_json curve_to_json(const Curve& curve) {
    ordered_json j;
    j["kind"] = curve.kind == CurveKind::Step ? "step" : "piecewise-linear";
    j["knots"] = std::vector<double>(curve.knots.data(), curve.knots.data() + curve.knots.size());
    j["values"] =
        std::vector<double>(curve.values.data(), curve.values.data() + curve.values.size());
    return j;
}

Curve curve_from_json(const ordered_json& j, const std::string& what) {
    Curve curve;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "step") {
        curve.kind = CurveKind::Step;
    } else if (kind == "piecewise-linear") {
        curve.kind = CurveKind::PiecewiseLinear;
    } else {
        throw DataError(what + ": unknown curve kind '" + kind + "'");
    }
    const auto knots = j.at("knots").get<std::vector<double>>();
    const auto values = j.at("values").get<std::vector<double>>();
    curve.knots = Eigen::Map<const Eigen::VectorXd>(knots.data(),
                                                    static_cast<Eigen::Index>(knots.size()));
    curve.values = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                     static_cast<Eigen::Index>(values.size()));
    return curve;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ordered_json parse_json_file(const std::string& path) {
    std::ifstream stream(path);
    if (!stream) throw DataError("cannot open " + path);
    try {
        return ordered_json::parse(stream);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp);
        out << contents;
        if (!out.flush()) throw DataError("failed writing " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void write_dataset(const GeneratedDataset& data, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());

    std::string subjects = "subject_id,time\n";
    std::string edges = "subject_id,node_a,node_b\n";
    for (const SubjectNetwork& subject : data.subjects) {
        subjects += subject.subject_id;
        subjects += ',';
        subjects += format_double(subject.time);
        subjects += '\n';
        for (const Edge& e : subject.edges) {
            edges += subject.subject_id;
            edges += ',';
            edges += std::to_string(e.a);
            edges += ',';
            edges += std::to_string(e.b);
            edges += '\n';
        }
    }

    std::string communities = "node,community\n";
    for (int j = 0; j < data.assignment.n(); ++j) {
        communities += std::to_string(j + 1);
        communities += ',';
        communities += std::to_string(data.assignment.memberships[static_cast<size_t>(j)]);
        communities += '\n';
    }

    write_file_atomic((fs::path(dir) / "subjects.csv").string(), subjects);
    write_file_atomic((fs::path(dir) / "edges.csv").string(), edges);
    write_file_atomic((fs::path(dir) / "communities.csv").string(), communities);
    write_truth(data.scenario, (fs::path(dir) / "truth.json").string());
}

Dataset load_dataset(const std::string& dir) {
    Dataset data;

    // communities.csv defines the node universe and the name -> index map.
    std::map<std::string, int> node_index;
    std::vector<int> memberships;
    {
        CsvReader reader((fs::path(dir) / "communities.csv").string());
        reader.expect_header("node,community");
        std::vector<std::string> fields;
        int max_label = 0;
        while (reader.next(fields)) {
            if (fields.size() != 2) fail_at(reader.path, reader.line_number, "expected 2 fields");
            if (!node_index.emplace(fields[0], static_cast<int>(node_index.size()) + 1).second) {
                fail_at(reader.path, reader.line_number, "duplicate node '" + fields[0] + "'");
            }
            const long label = parse_long(reader, fields[1]);
            if (label < 1) fail_at(reader.path, reader.line_number, "community label below 1");
            memberships.push_back(static_cast<int>(label));
            max_label = std::max(max_label, static_cast<int>(label));
            data.node_names.push_back(fields[0]);
        }
        if (memberships.empty()) fail_at(reader.path, reader.line_number, "no nodes listed");
        data.assignment = make_assignment(std::move(memberships), max_label);
    }

    // subjects.csv defines subjects and times.
    std::map<std::string, size_t> subject_index;
    {
        CsvReader reader((fs::path(dir) / "subjects.csv").string());
        reader.expect_header("subject_id,time");
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            if (fields.size() != 2) fail_at(reader.path, reader.line_number, "expected 2 fields");
            if (!subject_index.emplace(fields[0], data.subjects.size()).second) {
                fail_at(reader.path, reader.line_number,
                        "duplicate subject '" + fields[0] + "'");
            }
            SubjectNetwork subject;
            subject.subject_id = fields[0];
            subject.time = parse_double(reader, fields[1]);
            data.subjects.push_back(std::move(subject));
        }
        if (data.subjects.empty()) fail_at(reader.path, reader.line_number, "no subjects listed");
    }

    {
        CsvReader reader((fs::path(dir) / "edges.csv").string());
        reader.expect_header("subject_id,node_a,node_b");
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            if (fields.size() != 3) fail_at(reader.path, reader.line_number, "expected 3 fields");
            const auto subject = subject_index.find(fields[0]);
            if (subject == subject_index.end()) {
                fail_at(reader.path, reader.line_number,
                        "unknown subject '" + fields[0] + "'");
            }
            const auto a = node_index.find(fields[1]);
            const auto b = node_index.find(fields[2]);
            if (a == node_index.end()) {
                fail_at(reader.path, reader.line_number, "unknown node '" + fields[1] + "'");
            }
            if (b == node_index.end()) {
                fail_at(reader.path, reader.line_number, "unknown node '" + fields[2] + "'");
            }
            data.subjects[subject->second].edges.push_back(
                {std::min(a->second, b->second), std::max(a->second, b->second)});
        }
    }

    // Normalize out-of-range ordering variables (e.g. raw ages) into [0, 1].
    double lo = data.subjects.front().time;
    double hi = lo;
    for (const SubjectNetwork& subject : data.subjects) {
        lo = std::min(lo, subject.time);
        hi = std::max(hi, subject.time);
    }
    if (lo < 0.0 || hi > 1.0) {
        if (lo == hi) {
            throw DataError("all subject times equal " + format_double(lo) +
                            "; cannot normalize to [0, 1]");
        }
        for (SubjectNetwork& subject : data.subjects) {
            subject.time = (subject.time - lo) / (hi - lo);
        }
        data.time_normalized = true;
        data.time_min = lo;
        data.time_max = hi;
    }
    return data;
}

void write_truth(const Scenario& scenario, const std::string& path) {
    ordered_json j;
    j["format_version"] = 1;
    j["kind"] = "truth";
    j["rng"] = kRngAlgorithm;
    j["example"] = scenario.name;
    j["seed"] = scenario.seed;
    j["num_subjects"] = scenario.num_subjects;
    j["scale"] = "probability";
    j["network"]["num_nodes"] = scenario.n;
    j["network"]["communities"] = scenario.K;
    j["network"]["community_sizes"] = scenario.community_sizes;
    j["sigma"] = curve_to_json(scenario.sigma_curve);
    j["blocks"] = ordered_json::array();
    for (int p = 0; p < pair_count(scenario.K); ++p) {
        ordered_json block = curve_to_json(scenario.block_probability[static_cast<size_t>(p)]);
        block["block"] = pair_label(p, scenario.K);
        // Put the label first for readability.
        ordered_json entry;
        entry["block"] = block["block"];
        entry["kind"] = block["kind"];
        entry["knots"] = block["knots"];
        entry["values"] = block["values"];
        j["blocks"].push_back(entry);
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

Scenario load_truth(const std::string& path) {
    const ordered_json j = parse_json_file(path);
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw DataError(path + ": unsupported format_version");
        }
        Scenario scenario;
        scenario.name = j.at("example").get<std::string>();
        scenario.seed = j.at("seed").get<std::uint64_t>();
        scenario.num_subjects = j.at("num_subjects").get<long>();
        scenario.n = j.at("network").at("num_nodes").get<int>();
        scenario.K = j.at("network").at("communities").get<int>();
        scenario.community_sizes =
            j.at("network").at("community_sizes").get<std::vector<long>>();
        scenario.sigma_curve = curve_from_json(j.at("sigma"), path + ": sigma");

        const int P = pair_count(scenario.K);
        scenario.block_probability.resize(static_cast<size_t>(P));
        std::vector<bool> seen(static_cast<size_t>(P), false);
        for (const ordered_json& entry : j.at("blocks")) {
            const std::string label = entry.at("block").get<std::string>();
            int found = -1;
            for (int p = 0; p < P; ++p) {
                if (pair_label(p, scenario.K) == label) found = p;
            }
            if (found < 0) throw DataError(path + ": unknown block '" + label + "'");
            scenario.block_probability[static_cast<size_t>(found)] =
                curve_from_json(entry, path + ": block " + label);
            seen[static_cast<size_t>(found)] = true;
        }
        for (int p = 0; p < P; ++p) {
            if (!seen[static_cast<size_t>(p)]) {
                throw DataError(path + ": missing block '" + pair_label(p, scenario.K) + "'");
            }
        }
        validate_scenario(scenario);
        return scenario;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_fit(const FitResult& fit, const std::string& path) {
    ordered_json j;
    j["format_version"] = 1;
    j["kind"] = "fit";
    j["config"]["intervals"] = fit.config.S;
    j["config"]["partition"] = partition_mode_name(fit.config.partition);
    j["config"]["shape"] = shape_kind_name(fit.shape);
    j["config"]["quad_points"] = fit.config.quad_points;
    j["config"]["max_outer_iters"] = fit.config.max_outer_iters;
    j["config"]["objective_rel_tol"] = fit.config.objective_rel_tol;
    j["config"]["inner_tol"] = fit.config.inner_tol;
    j["data"]["num_subjects"] = fit.num_subjects;
    j["data"]["num_nodes"] = fit.num_nodes;
    j["data"]["communities"] = fit.K;
    j["data"]["time_normalized"] = fit.time_normalized;
    if (fit.time_normalized) {
        j["data"]["time_min"] = fit.time_min;
        j["data"]["time_max"] = fit.time_max;
    }
    j["partition"]["boundaries"] = to_std(fit.partition.boundaries);
    j["partition"]["warnings"] = fit.partition.warnings;
    j["sigma"] = to_std(fit.sigma);
    j["objective_trace"] = fit.objective_trace;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["quad_fallbacks"] = fit.quad_fallbacks;
    j["line_search_failures"] = fit.line_search_failures;
    j["blocks"] = ordered_json::array();
    for (const BlockFit& block : fit.blocks) {
        ordered_json entry;
        entry["block"] = block.label;
        entry["requested_shape"] = shape_kind_name(block.requested);
        entry["resolved_shape"] = shape_kind_name(block.resolved);
        entry["mode"] = block.mode;
        entry["b_star"] = block.b_star;
        entry["df"] = block.df;
        entry["bic_trace"] = to_std(block.bic_trace);
        entry["unconstrained"] = to_std(block.unconstrained);
        entry["shape_constrained"] = to_std(block.shaped);
        entry["fused"] = to_std(block.fused);
        j["blocks"].push_back(entry);
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

FitResult load_fit(const std::string& path) {
    const ordered_json j = parse_json_file(path);
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw DataError(path + ": unsupported format_version");
        }
        if (j.at("kind").get<std::string>() != "fit") {
            throw DataError(path + ": not a fit artifact");
        }
        FitResult fit;
        fit.config.S = j.at("config").at("intervals").get<int>();
        fit.config.partition = parse_partition_mode(j.at("config").at("partition"));
        fit.shape = parse_shape_kind(j.at("config").at("shape"));
        fit.config.quad_points = j.at("config").at("quad_points").get<int>();
        fit.config.max_outer_iters = j.at("config").at("max_outer_iters").get<int>();
        fit.config.objective_rel_tol = j.at("config").at("objective_rel_tol").get<double>();
        fit.config.inner_tol = j.at("config").at("inner_tol").get<double>();
        fit.num_subjects = j.at("data").at("num_subjects").get<long>();
        fit.num_nodes = j.at("data").at("num_nodes").get<int>();
        fit.K = j.at("data").at("communities").get<int>();
        fit.time_normalized = j.at("data").at("time_normalized").get<bool>();
        if (fit.time_normalized) {
            fit.time_min = j.at("data").at("time_min").get<double>();
            fit.time_max = j.at("data").at("time_max").get<double>();
        }
        fit.partition.boundaries =
            from_std(j.at("partition").at("boundaries").get<std::vector<double>>());
        fit.partition.warnings =
            j.at("partition").at("warnings").get<std::vector<std::string>>();
        fit.partition.mode = fit.config.partition;
        fit.sigma = from_std(j.at("sigma").get<std::vector<double>>());
        fit.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        fit.converged = j.at("converged").get<bool>();
        fit.iterations = j.at("iterations").get<int>();
        fit.quad_fallbacks = j.at("quad_fallbacks").get<long>();
        fit.line_search_failures = j.at("line_search_failures").get<long>();

        const int S = fit.partition.S();
        for (const ordered_json& entry : j.at("blocks")) {
            BlockFit block;
            block.label = entry.at("block").get<std::string>();
            block.requested = parse_shape_kind(entry.at("requested_shape"));
            block.resolved = parse_shape_kind(entry.at("resolved_shape"));
            block.mode = entry.at("mode").get<int>();
            block.b_star = entry.at("b_star").get<int>();
            block.df = entry.at("df").get<int>();
            block.bic_trace = from_std(entry.at("bic_trace").get<std::vector<double>>());
            block.unconstrained =
                from_std(entry.at("unconstrained").get<std::vector<double>>());
            block.shaped =
                from_std(entry.at("shape_constrained").get<std::vector<double>>());
            block.fused = from_std(entry.at("fused").get<std::vector<double>>());

            if (block.unconstrained.size() != S || block.shaped.size() != S ||
                block.fused.size() != S) {
                throw DataError(path + ": block " + block.label +
                                " estimate length does not match the partition");
            }
            // Self-validation: the fused estimate must still satisfy its
            // recorded constraints.
            if (degrees_of_freedom(block.fused) > block.b_star) {
                throw DataError(path + ": block " + block.label + " has " +
                                std::to_string(degrees_of_freedom(block.fused)) +
                                " runs, more than its fusion level " +
                                std::to_string(block.b_star));
            }
            const ShapeProjection check = project_shape(block.fused, block.resolved);
            if ((check.values - block.fused).cwiseAbs().maxCoeff() > 1e-9) {
                throw DataError(path + ": block " + block.label +
                                " fused estimate violates its recorded shape '" +
                                shape_kind_name(block.resolved) + "'");
            }
            fit.blocks.push_back(std::move(block));
        }
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace mesbm
