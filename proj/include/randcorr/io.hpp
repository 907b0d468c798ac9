// File formats and run configuration. Everything is line-oriented text
// with explicit headers: a dataset carries one setting per line, a report
// nests per-subset blocks, histograms and frontier tables are plain
// columns. Writers format deterministically so reruns are byte-identical.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/bisep.hpp"
#include "randcorr/core.hpp"
#include "randcorr/distributions.hpp"
#include "randcorr/sampling.hpp"
#include "randcorr/witness.hpp"

namespace randcorr {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scientific failure (ceiling violation, non-physical state) as opposed to
// bad input or unreadable files; the CLI maps this to its own exit code.
struct ScientificError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    return in;
}

inline void check_version(const std::string& line, const std::string& magic,
                          const std::string& path) {
    std::istringstream ss(line);
    std::string tag;
    long version = -1;
    ss >> tag >> version;
    if (tag != magic) throw IoError(path + ": not a " + magic + " file");
    if (version != 1)
        throw IoError(path + ": unsupported " + magic + " version " + std::to_string(version));
}

}  // namespace detail

// --------------------------------------------------------------------------
// Run configuration
// --------------------------------------------------------------------------

struct RunConfig {
    std::string state = "ghz";    // trisep | bisep | ghz | cluster | tensor
    double phi = 0.2;             // bisep parameter
    std::string tensor_file;      // input tensor when state == "tensor"
    std::uint64_t settings = 10000;
    std::uint32_t shots = 475;    // kExactShots = exact correlations
    std::string noise = "none";   // none | fresh | drift
    std::uint32_t drift_block = 1;
    std::uint64_t seed = 1;
    std::uint32_t bins = 50;
    double alpha = 0.01;
    double z = 3.0;
    int bayes_iterations = 30;
    unsigned threads = 0;         // 0 = hardware
    std::string output_dir = ".";

    void validate() const {
        if (state != "trisep" && state != "bisep" && state != "ghz" && state != "cluster" &&
            state != "tensor")
            throw std::invalid_argument("unknown state: " + state);
        if (state == "tensor" && tensor_file.empty())
            throw std::invalid_argument("state 'tensor' needs tensor_file");
        if (settings < 1) throw std::invalid_argument("settings must be >= 1");
        if (bins < 2) throw std::invalid_argument("bins must be >= 2");
        if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha must be in (0,1)");
        if (z <= 0.0) throw std::invalid_argument("z must be positive");
        if (bayes_iterations < 1) throw std::invalid_argument("bayes_iterations must be >= 1");
        if (drift_block < 1) throw std::invalid_argument("drift_block must be >= 1");
        NoiseModel::parse(noise == "drift" ? "drift " + std::to_string(drift_block) : noise);
    }

    NoiseModel noise_model() const {
        if (noise == "drift") return NoiseModel::drift(drift_block);
        return NoiseModel::parse(noise);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["state"] = state;
        j["phi"] = phi;
        if (!tensor_file.empty()) j["tensor_file"] = tensor_file;
        j["settings"] = settings;
        j["shots"] = shots == kExactShots ? nlohmann::json("exact") : nlohmann::json(shots);
        j["noise"] = noise;
        j["drift_block"] = drift_block;
        j["seed"] = seed;
        j["bins"] = bins;
        j["alpha"] = alpha;
        j["z"] = z;
        j["bayes_iterations"] = bayes_iterations;
        j["threads"] = threads;
        j["output_dir"] = output_dir;
        return j;
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
        };
        get("state", c.state);
        get("phi", c.phi);
        get("tensor_file", c.tensor_file);
        get("settings", c.settings);
        if (j.contains("shots")) {
            const auto& s = j.at("shots");
            c.shots = s.is_string() ? (s.get<std::string>() == "exact"
                                           ? kExactShots
                                           : throw std::invalid_argument("bad shots value"))
                                    : s.get<std::uint32_t>();
        }
        get("noise", c.noise);
        get("drift_block", c.drift_block);
        get("seed", c.seed);
        get("bins", c.bins);
        get("alpha", c.alpha);
        get("z", c.z);
        get("bayes_iterations", c.bayes_iterations);
        get("threads", c.threads);
        get("output_dir", c.output_dir);
        return c;
    }

    void save(const std::filesystem::path& path) const {
        auto out = detail::open_out(path);
        out << to_json().dump(2) << "\n";
    }

    static RunConfig load(const std::filesystem::path& path) {
        auto in = detail::open_in(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("bad config " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }
};

// --------------------------------------------------------------------------
// Tensor files
// --------------------------------------------------------------------------

inline int pauli_letter_to_digit(char c) {
    switch (c) {
        case 'I': case 'i': case '0': return 0;
        case 'X': case 'x': case '1': return 1;
        case 'Y': case 'y': case '2': return 2;
        case 'Z': case 'z': case '3': return 3;
    }
    throw IoError(std::string("bad Pauli letter '") + c + "'");
}

inline std::string pauli_word(std::size_t flat, int n) {
    static const char letters[] = "IXYZ";
    std::string s(n, 'I');
    for (int q = 0; q < n; ++q) s[q] = letters[pauli_digit(flat, q)];
    return s;
}

// Sparse listing: "<pauli word> <value>" per line, first qubit first.
inline CorrelationTensor tensor_read(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    detail::check_version(line, "randcorr-tensor", path.string());
    int n = 0;
    {
        std::string key;
        if (!std::getline(in, line)) throw IoError(path.string() + ": truncated header");
        std::istringstream ss(line);
        ss >> key >> n;
        if (key != "n" || n < 1 || n > kMaxQubits)
            throw IoError(path.string() + ": bad qubit count line");
    }
    CorrelationTensor t = CorrelationTensor::zero(n);
    t[0] = 1.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string word;
        double value = 0.0;
        if (!(ss >> word >> value))
            throw IoError(path.string() + ": bad tensor line: " + line);
        if (int(word.size()) != n)
            throw IoError(path.string() + ": Pauli word length mismatch: " + word);
        std::size_t flat = 0;
        for (int q = 0; q < n; ++q)
            flat |= std::size_t(pauli_letter_to_digit(word[q])) << (2 * q);
        if (flat == 0 && std::abs(value - 1.0) > 1e-12)
            throw IoError(path.string() + ": identity entry must be 1");
        t[flat] = flat == 0 ? 1.0 : value;
    }
    return t;
}

inline void tensor_write(const std::filesystem::path& path, const CorrelationTensor& t) {
    auto out = detail::open_out(path);
    out << "randcorr-tensor 1\n";
    out << "n " << t.qubit_count() << "\n";
    for (std::size_t mu = 1; mu < t.size(); ++mu)
        if (t[mu] != 0.0)
            out << pauli_word(mu, t.qubit_count()) << " " << detail::fmt("%.15g", t[mu]) << "\n";
}

// --------------------------------------------------------------------------
// Dataset files
// --------------------------------------------------------------------------

inline void dataset_write(const std::filesystem::path& path, const CorrelationDataset& ds) {
    auto out = detail::open_out(path);
    out << "randcorr-dataset 1\n";
    out << "n " << ds.n << "\n";
    out << "settings " << ds.records.size() << "\n";
    if (ds.exact_mode())
        out << "shots exact\n";
    else
        out << "shots " << ds.shots << "\n";
    out << "seed " << ds.seed << "\n";
    out << "noise " << ds.noise.name() << "\n";
    if (!ds.state_label.empty()) out << "state " << ds.state_label << "\n";
    out << "columns index directions[" << 3 * ds.n << "] correlations[mask=1.."
        << ((1u << ds.n) - 1) << "]\n";
    out << "end-header\n";
    for (const auto& rec : ds.records) {
        out << rec.index;
        for (const auto& d : rec.setting.directions)
            for (double c : d) out << " " << detail::fmt("%.12g", c);
        for (std::size_t mask = 1; mask < rec.correlations.size(); ++mask)
            out << " " << detail::fmt("%.15g", rec.correlations[mask]);
        out << "\n";
    }
}

inline CorrelationDataset dataset_read(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    detail::check_version(line, "randcorr-dataset", path.string());

    CorrelationDataset ds;
    std::size_t expected = 0;
    bool have_n = false, have_settings = false, have_shots = false;
    while (std::getline(in, line)) {
        if (line == "end-header") break;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "n") {
            ss >> ds.n;
            have_n = true;
        } else if (key == "settings") {
            ss >> expected;
            have_settings = true;
        } else if (key == "shots") {
            std::string v;
            ss >> v;
            ds.shots = (v == "exact") ? kExactShots : std::uint32_t(std::stoul(v));
            have_shots = true;
        } else if (key == "seed") {
            ss >> ds.seed;
        } else if (key == "noise") {
            std::string rest;
            std::getline(ss, rest);
            std::size_t pos = rest.find_first_not_of(' ');
            ds.noise = NoiseModel::parse(pos == std::string::npos ? "none" : rest.substr(pos));
        } else if (key == "state") {
            std::string rest;
            std::getline(ss, rest);
            std::size_t pos = rest.find_first_not_of(' ');
            if (pos != std::string::npos) ds.state_label = rest.substr(pos);
        } else if (key == "columns" || key.empty() || key[0] == '#') {
            // informational
        } else {
            throw IoError(path.string() + ": unknown header key: " + key);
        }
    }
    if (!have_n || !have_settings || !have_shots)
        throw IoError(path.string() + ": incomplete header");
    require_qubit_count(ds.n);

    const std::size_t mask_count = (std::size_t(1) << ds.n) - 1;
    ds.records.reserve(expected);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        SettingRecord rec;
        rec.shots = ds.shots;
        if (!(ss >> rec.index)) throw IoError(path.string() + ": bad record line: " + line);
        rec.setting.directions.resize(ds.n);
        for (int q = 0; q < ds.n; ++q)
            for (int c = 0; c < 3; ++c)
                if (!(ss >> rec.setting.directions[q][c]))
                    throw IoError(path.string() + ": truncated directions in line: " + line);
        rec.correlations.assign(mask_count + 1, 0.0);
        rec.correlations[0] = 1.0;
        for (std::size_t mask = 1; mask <= mask_count; ++mask) {
            if (!(ss >> rec.correlations[mask]))
                throw IoError(path.string() + ": truncated correlations in line: " + line);
            if (std::abs(rec.correlations[mask]) > 1.0 + 1e-12)
                throw IoError(path.string() + ": correlation out of range in line: " + line);
        }
        double extra;
        if (ss >> extra) throw IoError(path.string() + ": excess columns in line: " + line);
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.size() != expected)
        throw IoError(path.string() + ": header promises " + std::to_string(expected) +
                      " settings, file has " + std::to_string(ds.records.size()));
    return ds;
}

// --------------------------------------------------------------------------
// Report files
// --------------------------------------------------------------------------

inline void report_write(const std::filesystem::path& path, const WitnessReport& report) {
    auto out = detail::open_out(path);
    out << "randcorr-report 1\n";
    out << "n " << report.n << "\n";
    out << "settings " << report.setting_count << "\n";
    if (report.shots == kExactShots)
        out << "shots exact\n";
    else
        out << "shots " << report.shots << "\n";
    out << "estimator " << estimator_tag_name(report.estimator) << "\n";
    out << "z " << detail::fmt("%.15g", report.z_threshold) << "\n";
    out << "purity " << detail::fmt("%.15g", report.purity.value) << " "
        << detail::fmt("%.15g", report.purity.error) << "\n";
    for (const auto& s : report.subsets) {
        out << "subset " << s.subset.label() << "\n";
        out << "  moment " << detail::fmt("%.15g", s.moment.value) << " "
            << detail::fmt("%.15g", s.moment.std_error) << "\n";
        out << "  purity " << detail::fmt("%.15g", s.purity.value) << " "
            << detail::fmt("%.15g", s.purity.error) << "\n";
        if (s.has_witness) {
            out << "  witness " << detail::fmt("%.15g", s.witness.value) << " "
                << detail::fmt("%.15g", s.witness.error) << "\n";
            out << "  bound " << detail::fmt("%.15g", s.bound) << " "
                << detail::fmt("%.15g", s.bound_error) << "\n";
            out << "  verdict " << verdict_name(s.verdict) << "\n";
        }
    }
    out << "end-report\n";
}

inline WitnessReport report_read(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    detail::check_version(line, "randcorr-report", path.string());
    WitnessReport report;
    SubsetReport* current = nullptr;
    auto parse_verdict = [](const std::string& s) {
        if (s == "not-detected") return Verdict::not_detected;
        if (s == "entangled") return Verdict::entangled;
        if (s == "GME-detected") return Verdict::gme_detected;
        throw IoError("unknown verdict: " + s);
    };
    while (std::getline(in, line)) {
        if (line == "end-report") break;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "n") ss >> report.n;
        else if (key == "settings") ss >> report.setting_count;
        else if (key == "shots") {
            std::string v;
            ss >> v;
            report.shots = v == "exact" ? kExactShots : std::uint32_t(std::stoul(v));
        } else if (key == "estimator") {
            std::string v;
            ss >> v;
            report.estimator = v == "exact" ? EstimatorTag::exact
                               : v == "bayes" ? EstimatorTag::bayes_corrected
                                              : EstimatorTag::raw;
        } else if (key == "z") ss >> report.z_threshold;
        else if (key == "purity" && !current) ss >> report.purity.value >> report.purity.error;
        else if (key == "subset") {
            std::string label;
            ss >> label;
            report.subsets.emplace_back();
            current = &report.subsets.back();
            current->subset = SubsetMask::from_label(label, report.n);
        } else if (current && key == "moment") {
            ss >> current->moment.value >> current->moment.std_error;
            current->moment.subset = current->subset;
            current->moment.valid = true;
            current->moment.tag = report.estimator;
        } else if (current && key == "purity") {
            ss >> current->purity.value >> current->purity.error;
        } else if (current && key == "witness") {
            current->has_witness = true;
            ss >> current->witness.value >> current->witness.error;
        } else if (current && key == "bound") {
            ss >> current->bound >> current->bound_error;
        } else if (current && key == "verdict") {
            std::string v;
            ss >> v;
            current->verdict = parse_verdict(v);
        } else {
            throw IoError(path.string() + ": unexpected report line: " + line);
        }
    }
    return report;
}

// --------------------------------------------------------------------------
// Histogram / curve / frontier files
// --------------------------------------------------------------------------

inline void histogram_write(const std::filesystem::path& path, const Histogram& h,
                            const std::string& description) {
    auto out = detail::open_out(path);
    out << "# randcorr-histogram 1\n";
    out << "# " << description << "\n";
    out << "# bins " << h.bins() << " samples " << h.sample_count << " norm "
        << (h.norm == HistogramNorm::density ? "density" : "counts") << "\n";
    for (std::size_t i = 0; i < h.bins(); ++i)
        out << detail::fmt("%.12g", h.bin_center(i)) << " " << detail::fmt("%.15g", h.values[i])
            << "\n";
}

inline void curve_write(const std::filesystem::path& path, const std::vector<double>& xs,
                        const std::vector<double>& ys, const std::string& description) {
    if (xs.size() != ys.size()) throw std::invalid_argument("curve size mismatch");
    auto out = detail::open_out(path);
    out << "# randcorr-curve 1\n";
    out << "# " << description << "\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << detail::fmt("%.12g", xs[i]) << " " << detail::fmt("%.15g", ys[i]) << "\n";
}

inline void frontier_write(const std::filesystem::path& path, const FrontierTable& table,
                           std::uint64_t seed) {
    auto out = detail::open_out(path);
    out << "# randcorr-frontier 1\n";
    out << "# n " << table.n << " samples " << table.sample_count << " seed " << seed
        << " tolerance " << detail::fmt("%.3g", table.tolerance) << " violations "
        << table.violation_count() << "\n";
    out << "# columns: purity-lo purity-hi count max-witness bound-at-center violations\n";
    for (const auto& bin : table.bins) {
        std::size_t viol = 0;
        for (const auto& v : table.violations)
            if (v.purity >= bin.lo && v.purity < bin.hi) ++viol;
        out << detail::fmt("%.6g", bin.lo) << " " << detail::fmt("%.6g", bin.hi) << " "
            << bin.count << " " << detail::fmt("%.15g", bin.max_witness) << " "
            << detail::fmt("%.15g", bin.bound_at_center) << " " << viol << "\n";
    }
}

}  // namespace randcorr
