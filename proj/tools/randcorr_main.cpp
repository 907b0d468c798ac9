// Command-line driver: simulate datasets of randomized local measurements,
// analyze them into witness reports and distribution files, scan the
// biseparable witness frontier, and pretty-print reports.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
// 3 scientific failure (ceiling violation or non-physical state).

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "randcorr/io.hpp"

namespace fs = std::filesystem;
using namespace randcorr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitScience = 3;

std::string default_output_dir() {
    if (const char* env = std::getenv("RANDCORR_OUTDIR"); env && *env) return env;
    return ".";
}

std::uint32_t parse_shots(const std::string& text) {
    if (text == "exact") return kExactShots;
    unsigned long v = std::stoul(text);
    if (v == 0 || v > 0xffffffffull)
        throw std::invalid_argument("shots must be a positive integer or 'exact'");
    return std::uint32_t(v);
}

DensityMatrix state_from_config(const RunConfig& cfg) {
    if (cfg.state == "tensor") {
        CorrelationTensor t = tensor_read(cfg.tensor_file);
        try {
            return state_from_tensor(t);
        } catch (const std::invalid_argument& e) {
            throw ScientificError(e.what());  // non-physical input state
        }
    }
    return make_reference_state(reference_state_from_name(cfg.state), cfg.phi);
}

std::string state_label(const RunConfig& cfg) {
    if (cfg.state == "tensor") return "tensor " + fs::path(cfg.tensor_file).filename().string();
    if (cfg.state == "bisep") return "bisep phi=" + detail::fmt("%.6g", cfg.phi);
    return cfg.state;
}

void print_report(std::ostream& os, const WitnessReport& report) {
    os << "qubits " << report.n << ", settings " << report.setting_count << ", shots ";
    if (report.shots == kExactShots) os << "exact";
    else os << report.shots;
    os << ", estimator " << estimator_tag_name(report.estimator) << ", z "
       << report.z_threshold << "\n";
    os << "purity " << detail::fmt("%.6f", report.purity.value) << " +- "
       << detail::fmt("%.6f", report.purity.error) << "\n";
    os << "subset     moment          purity          witness          bound         verdict\n";
    for (const auto& s : report.subsets) {
        char line[256];
        if (s.has_witness) {
            std::snprintf(line, sizeof line,
                          "%-9s %8.5f+-%.5f %8.5f+-%.5f %9.5f+-%.5f %9.5f  %s",
                          s.subset.label().c_str(), s.moment.value, s.moment.std_error,
                          s.purity.value, s.purity.error, s.witness.value, s.witness.error,
                          s.bound, verdict_name(s.verdict).c_str());
        } else {
            std::snprintf(line, sizeof line, "%-9s %8.5f+-%.5f %8.5f+-%.5f",
                          s.subset.label().c_str(), s.moment.value, s.moment.std_error,
                          s.purity.value, s.purity.error);
        }
        os << line << "\n";
    }
}

struct CommonFlags {
    std::string config_path;
    RunConfig cfg;

    void finalize(const CLI::App& app) {
        RunConfig base;
        if (!config_path.empty()) base = RunConfig::load(config_path);
        base.output_dir = app.count("--out-dir") ? cfg.output_dir
                          : !config_path.empty() && base.output_dir != "."
                              ? base.output_dir
                              : default_output_dir();
        auto take = [&](const char* flag, auto member) {
            if (app.count(flag)) base.*member = cfg.*member;
        };
        take("--state", &RunConfig::state);
        take("--phi", &RunConfig::phi);
        take("--tensor", &RunConfig::tensor_file);
        take("--settings", &RunConfig::settings);
        take("--noise", &RunConfig::noise);
        take("--drift-block", &RunConfig::drift_block);
        take("--seed", &RunConfig::seed);
        take("--bins", &RunConfig::bins);
        take("--alpha", &RunConfig::alpha);
        take("--z", &RunConfig::z);
        take("--bayes-iterations", &RunConfig::bayes_iterations);
        take("--threads", &RunConfig::threads);
        if (app.count("--shots")) base.shots = cfg.shots;
        cfg = base;
        cfg.validate();
    }
};

void add_common_flags(CLI::App* app, CommonFlags& common, std::string& shots_text) {
    app->add_option("-c,--config", common.config_path, "JSON config file");
    app->add_option("--state", common.cfg.state, "trisep|bisep|ghz|cluster|tensor");
    app->add_option("--phi", common.cfg.phi, "bisep family parameter (radians)");
    app->add_option("--tensor", common.cfg.tensor_file, "correlation tensor input file");
    app->add_option("--settings", common.cfg.settings, "number of random settings");
    app->add_option("--shots", shots_text, "shots per setting, or 'exact'");
    app->add_option("--noise", common.cfg.noise, "none|fresh|drift");
    app->add_option("--drift-block", common.cfg.drift_block, "settings per drift block");
    app->add_option("--seed", common.cfg.seed, "random seed");
    app->add_option("--bins", common.cfg.bins, "histogram bins");
    app->add_option("--alpha", common.cfg.alpha, "test significance level");
    app->add_option("--z", common.cfg.z, "detection threshold in standard errors");
    app->add_option("--bayes-iterations", common.cfg.bayes_iterations,
                    "bias-correction update passes");
    app->add_option("--threads", common.cfg.threads, "worker threads (0 = hardware)");
    app->add_option("--out-dir", common.cfg.output_dir, "output directory");
}

int cmd_simulate(const CommonFlags& common, const std::string& output) {
    const RunConfig& cfg = common.cfg;
    DensityMatrix rho = state_from_config(cfg);
    CorrelationDataset ds = run_experiment(rho, cfg.settings, cfg.shots, cfg.noise_model(),
                                           cfg.seed, cfg.threads);
    ds.state_label = state_label(cfg);
    fs::path path = output.empty() ? fs::path(cfg.output_dir) / "dataset.txt"
                                   : fs::path(output);
    dataset_write(path, ds);
    std::cout << "wrote " << path.string() << " (" << ds.records.size() << " settings)\n";
    return kExitOk;
}

int cmd_analyze(const CommonFlags& common, const std::string& dataset_path) {
    const RunConfig& cfg = common.cfg;
    CorrelationDataset ds = dataset_read(dataset_path);
    fs::path dir(cfg.output_dir);
    if (!dir.empty()) fs::create_directories(dir);

    ReportOptions opts;
    opts.z_threshold = cfg.z;
    opts.bayes.iterations = cfg.bayes_iterations;
    opts.threads = cfg.threads;
    WitnessReport report = witness_report(ds, opts);
    report_write(dir / "report.txt", report);

    // per-subset modulus histograms plus the reference curves on the same grid
    const std::uint32_t full = SubsetMask::full(ds.n).bits;
    std::vector<double> centers(cfg.bins);
    for (std::uint32_t b = 0; b < cfg.bins; ++b)
        centers[b] = (double(b) + 0.5) / double(cfg.bins);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        SubsetMask subset(mask);
        auto h = histogram(ds, subset, cfg.bins, false, HistogramNorm::density);
        histogram_write(dir / ("hist_" + subset.label() + "_abs.txt"), h,
                        "subset " + subset.label() + " modulus correlations");
    }
    for (int k = 1; k <= ds.n; ++k)
        curve_write(dir / ("curve_product_pure_" + std::to_string(k) + ".txt"), centers,
                    theoretical_density(DistributionModel::product_pure, k, centers),
                    "pure product state of " + std::to_string(k) + " qubits");
    curve_write(dir / "curve_uniform.txt", centers,
                theoretical_density(DistributionModel::uniform, 0, centers),
                "maximally entangled pair");

    // factorization tests for every unordered bipartition of the full set
    // and for every singleton pair
    {
        auto out = detail::open_out(dir / "product_tests.txt");
        out << "# randcorr-product-tests 1\n";
        out << "# columns: cut statistic threshold verdict\n";
        auto run_test = [&](SubsetMask a, SubsetMask b) {
            TestResult res = product_distribution_test(ds, a, b, cfg.alpha);
            out << a.label() << "|" << b.label() << " " << detail::fmt("%.6g", res.statistic)
                << " " << detail::fmt("%.6g", res.threshold) << " "
                << (res.verdict == ProductVerdict::product_rejected ? "product-rejected"
                                                                    : "consistent-with-product")
                << "\n";
        };
        for (const auto& cut : bipartitions(ds.n))
            run_test(cut, SubsetMask(full & ~cut.bits));
        for (int i = 0; i < ds.n; ++i)
            for (int j = i + 1; j < ds.n; ++j)
                run_test(SubsetMask(1u << i), SubsetMask(1u << j));
    }

    print_report(std::cout, report);
    std::cout << "wrote " << (dir / "report.txt").string() << "\n";
    return kExitOk;
}

int cmd_scan(int n, std::size_t samples, std::uint64_t seed, const std::string& ensemble,
             double bin_width, double tolerance, unsigned threads,
             const std::string& output, const std::string& out_dir) {
    ScanOptions opts;
    opts.bin_width = bin_width;
    opts.tolerance = tolerance;
    opts.threads = threads;
    if (ensemble == "all") opts.ensemble = ScanEnsemble::all_states;
    else if (ensemble != "bisep")
        throw std::invalid_argument("ensemble must be 'bisep' or 'all'");

    FrontierTable table = scan_bound(n, samples, seed, opts);
    fs::path path = output.empty() ? fs::path(out_dir) / "frontier.txt" : fs::path(output);
    frontier_write(path, table, seed);
    std::cout << "wrote " << path.string() << " (" << table.sample_count << " samples, "
              << table.violation_count() << " violations)\n";
    if (table.violation_count() > 0) {
        std::cerr << "ceiling violations detected; offending stream ids:\n";
        for (const auto& v : table.violations)
            std::cerr << "  stream " << v.stream_id << (v.stratified ? " (stratified)" : "")
                      << " purity " << detail::fmt("%.12g", v.purity) << " witness "
                      << detail::fmt("%.12g", v.witness) << "\n";
        throw ScientificError("biseparable ceiling violated");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement analysis from random-measurement correlations"};
    app.require_subcommand(1);

    CommonFlags common;
    std::string shots_text = "475";
    std::string output;
    std::string dataset_path;
    std::string report_path;

    CLI::App* simulate = app.add_subcommand("simulate", "generate a correlation dataset");
    add_common_flags(simulate, common, shots_text);
    simulate->add_option("-o,--output", output, "dataset file path");

    CLI::App* analyze = app.add_subcommand("analyze", "witness report and distributions");
    add_common_flags(analyze, common, shots_text);
    analyze->add_option("dataset", dataset_path, "dataset file")->required();

    CLI::App* scan = app.add_subcommand("scan", "scan the biseparable witness frontier");
    int scan_n = 3;
    std::size_t scan_samples = 100000;
    std::uint64_t scan_seed = 1;
    std::string scan_ensemble = "bisep";
    double scan_bin_width = 0.01, scan_tolerance = 1e-9;
    unsigned scan_threads = 0;
    std::string scan_out_dir = default_output_dir();
    scan->add_option("--n", scan_n, "qubit count (3 or 4)")->required();
    scan->add_option("--samples", scan_samples, "number of random states");
    scan->add_option("--seed", scan_seed, "random seed");
    scan->add_option("--ensemble", scan_ensemble, "bisep|all");
    scan->add_option("--bin-width", scan_bin_width, "purity bin width");
    scan->add_option("--tolerance", scan_tolerance, "violation tolerance");
    scan->add_option("--threads", scan_threads, "worker threads (0 = hardware)");
    scan->add_option("--out-dir", scan_out_dir, "output directory");
    scan->add_option("-o,--output", output, "frontier file path");

    CLI::App* report = app.add_subcommand("report", "pretty-print a report file");
    report->add_option("report", report_path, "report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed() || analyze->parsed()) {
            CLI::App* sub = simulate->parsed() ? simulate : analyze;
            if (sub->count("--shots")) common.cfg.shots = parse_shots(shots_text);
            common.finalize(*sub);
        }
        if (simulate->parsed()) return cmd_simulate(common, output);
        if (analyze->parsed()) return cmd_analyze(common, dataset_path);
        if (scan->parsed()) {
            if (scan_n < 3 || scan_n > 4)
                throw std::invalid_argument("scan supports --n 3 or --n 4");
            return cmd_scan(scan_n, scan_samples, scan_seed, scan_ensemble, scan_bin_width,
                            scan_tolerance, scan_threads, output, scan_out_dir);
        }
        if (report->parsed()) {
            print_report(std::cout, report_read(report_path));
            return kExitOk;
        }
    } catch (const ScientificError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitScience;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitScience;
    }
    return kExitUsage;
}
