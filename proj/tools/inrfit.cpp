// inrfit: fit implicit neural representations (SIREN/FINER families with
// optional Nyquist-informed per-neuron frequency multipliers) to audio,
// images, and occupancy volumes; includes a truncated-DST baseline and
// hidden-feature redundancy analysis.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <CLI11.hpp>

#include "inrfit/experiment.hpp"

namespace {

struct CliOptions {
    std::string task = "image";
    inrfit::ExperimentConfig cfg;
    // mirrors for optional fields (CLI11 binds concrete values)
    int depth = 0;
    double omega0_first = 0.0, omega0_hidden = 0.0;
    double nyquist_factor = 0.0;
    double learning_rate = 0.0;
    int epochs = -1;
    int batch_size = 0; // 0 = full batch
    std::string components = "200:0.5,650:0.3,1500:0.2";
    std::string outdir;
    std::string config_path;
    std::vector<std::string> checkpoints;
};

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// CLI11 only reads config files for the root command, so a --config given to a
// subcommand is silently ignored. Splice the file's key=value pairs in as flags
// right after the subcommand token instead; explicit flags appear later in the
// arg list and win through the take-last policy.
std::vector<std::string> splice_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;
    size_t insert_at = 0;
    for (size_t i = 0; i < args.size(); ++i)
        if (!args[i].empty() && args[i][0] != '-') {
            insert_at = i + 1;
            break;
        }
    if (insert_at == 0) return args; // no subcommand; let the parser complain
    std::ifstream in(path);
    if (!in) throw inrfit::DataError("cannot read config file: " + path);
    std::vector<std::string> spliced;
    std::string line;
    while (std::getline(in, line)) {
        const std::string item = trim(line);
        if (item.empty() || item[0] == '#' || item[0] == ';' || item[0] == '[') continue;
        const size_t eq = item.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(item.substr(0, eq));
        std::string value = trim(item.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (key.empty() || key == "config") continue;
        spliced.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + static_cast<long>(insert_at), spliced.begin(), spliced.end());
    return args;
}

std::vector<std::pair<double, double>> parse_components(const std::string& text) {
    std::vector<std::pair<double, double>> comps;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        const size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw inrfit::ConfigError("--audio-components: expected freq:amp pairs, got '" + item + "'");
        try {
            comps.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw inrfit::ConfigError("--audio-components: cannot parse '" + item + "'");
        }
        pos = comma + 1;
    }
    if (comps.empty()) throw inrfit::ConfigError("--audio-components: empty list");
    return comps;
}

std::string default_out_root() {
    const char* env = std::getenv("INRFIT_OUT");
    return env && *env ? env : "runs";
}

// Transfer CLI mirrors into the optional-bearing config.
void finalize_config(CliOptions& opt, const CLI::App& cmd) {
    opt.cfg.task = inrfit::task_from_string(opt.task);
    if (cmd.count("--depth")) opt.cfg.depth = opt.depth;
    if (cmd.count("--omega0-first")) opt.cfg.omega0_first = opt.omega0_first;
    if (cmd.count("--omega0-hidden")) opt.cfg.omega0_hidden = opt.omega0_hidden;
    if (cmd.count("--nyquist-factor")) opt.cfg.nyquist_factor = opt.nyquist_factor;
    if (cmd.count("--lr")) opt.cfg.learning_rate = opt.learning_rate;
    if (cmd.count("--epochs")) opt.cfg.epochs = opt.epochs;
    if (cmd.count("--batch-size") && opt.batch_size > 0) opt.cfg.batch_size = opt.batch_size;
    opt.cfg.audio_components = parse_components(opt.components);
    inrfit::resolve_defaults(opt.cfg);
}

void add_model_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--task", opt.task, "Task: audio|image|shape")->default_val("image");
    cmd->add_option("--kind", opt.cfg.kind, "Model kind: siren|finer|fm-siren|fm-finer|gauss|pe")
        ->default_val("fm-siren");
    cmd->add_option("--width", opt.cfg.width, "Neurons per hidden layer")->default_val(256);
    cmd->add_option("--depth", opt.depth, "Hidden layers (default 2, shape 3)");
    cmd->add_option("--omega0-first", opt.omega0_first, "First-layer omega0 (default per task table)");
    cmd->add_option("--omega0-hidden", opt.omega0_hidden, "Hidden-layer omega0 (default per task table)");
    cmd->add_option("--gauss-scale", opt.cfg.gauss_scale, "Gauss activation scale s")->default_val(16.0);
    cmd->add_option("--pe-scale", opt.cfg.pe_scale, "Positional-encoding max exponent")->default_val(15);
    cmd->add_option("--nyquist-factor", opt.nyquist_factor,
                    "Multiplier ladder factor in (0,1] (default 1, fm-finer 2/3)");
    cmd->add_option("--angular-scale", opt.cfg.angular_scale,
                    "Extra scale on every frequency multiplier (pi converts cycles/signal to rad "
                    "on [-1,1] coords)")
        ->default_val(3.14159265358979323846);
    cmd->add_option("--k-offset", opt.cfg.k_offset, "Start multiplier ladder at k+offset")->default_val(0);
    cmd->add_flag("--first-layer-only", opt.cfg.first_layer_only,
                  "Apply frequency multipliers only to the first layer");
    cmd->add_option("--lr", opt.learning_rate, "Learning rate (default 1e-4 audio, 1e-3 image/shape)");
    cmd->add_option("--epochs", opt.epochs, "Training epochs (default 500, shape 75)");
    cmd->add_option("--lr-decay-gamma", opt.cfg.lr_decay_gamma, "StepLR decay factor")->default_val(0.1);
    cmd->add_option("--lr-decay-every", opt.cfg.lr_decay_every, "StepLR decay period in epochs")
        ->default_val(100);
    cmd->add_option("--batch-size", opt.batch_size, "Mini-batch size, 0 = full batch (shape default 32768)");
    cmd->add_option("--adam-beta1", opt.cfg.adam_beta1, "Adam first-moment decay")->default_val(0.9);
    cmd->add_option("--adam-beta2", opt.cfg.adam_beta2, "Adam second-moment decay")->default_val(0.999);
    cmd->add_option("--adam-eps", opt.cfg.adam_eps, "Adam denominator epsilon")->default_val(1e-8);
    cmd->add_option("--seed", opt.cfg.seed, "Seed for init and shuffling")->default_val(0);
    cmd->add_option("--input", opt.cfg.input_path, "Input file (WAV / PGM / PPM / occupancy grid)");
    cmd->add_option("--audio-duration", opt.cfg.audio_duration, "Synthetic audio length, seconds")
        ->default_val(1.0);
    cmd->add_option("--audio-rate", opt.cfg.audio_rate, "Synthetic audio sample rate, Hz")->default_val(4000.0);
    cmd->add_option("--audio-components", opt.components, "Synthetic audio freq:amp list");
    cmd->add_option("--image-size", opt.cfg.image_size, "Synthetic circles image size")->default_val(64);
    cmd->add_option("--image-rings", opt.cfg.image_rings, "Synthetic circles ring count")->default_val(24);
    cmd->add_option("--shape-res", opt.cfg.shape_resolution, "Synthetic occupancy resolution")->default_val(64);
    cmd->add_option("--shape-kind", opt.cfg.shape_kind, "Synthetic shape: sphere|torus")->default_val("sphere");
    cmd->add_option("--sphere-radius", opt.cfg.sphere_radius, "Sphere radius in [-1,1] units")->default_val(0.5);
    cmd->add_option("--torus-major", opt.cfg.torus_major, "Torus ring radius")->default_val(0.6);
    cmd->add_option("--torus-minor", opt.cfg.torus_minor, "Torus tube radius")->default_val(0.25);
    cmd->add_option("--out", opt.outdir, "Output directory (default under $INRFIT_OUT or ./runs)");
    cmd->add_option("--config", opt.config_path, "Read options from an INI file (flags win)")
        ->configurable(false);
}

// Echo the options that were explicitly set (flags or config file). The
// fully resolved values live in manifest.json; unset options are omitted so
// the file reloads cleanly through --config.
void write_resolved_ini(const CLI::App& cmd, const std::string& dir) {
    std::ofstream out(dir + "/resolved.ini");
    if (out) out << cmd.config_to_str(false, true);
}

int dispatch(CLI::App& app, CliOptions& opt, int argc, char** argv) {
    CLI::App* train = app.get_subcommand("train");
    CLI::App* analyze = app.get_subcommand("analyze");
    CLI::App* dst = app.get_subcommand("dst");
    CLI::App* sweep = app.get_subcommand("sweep");

    std::vector<std::string> args = splice_config_args(argc, argv);
    std::reverse(args.begin(), args.end()); // CLI11's vector overload pops from the back
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    if (train->parsed()) {
        finalize_config(opt, *train);
        if (opt.outdir.empty())
            opt.outdir = default_out_root() + "/train_" + opt.task + "_" + opt.cfg.kind + "_seed" +
                         std::to_string(opt.cfg.seed);
        opt.cfg.outdir = opt.outdir;
        inrfit::TrainOutcome out = inrfit::run_train_experiment(opt.cfg);
        write_resolved_ini(*train, opt.cfg.outdir);
        std::printf("trained %s/%s: params=%zu final_loss=%.6e", opt.task.c_str(), opt.cfg.kind.c_str(),
                    out.params, out.report.loss.empty() ? 0.0 : out.report.loss.back());
        for (const auto& [k, v] : out.metrics) std::printf(" %s=%.6g", k.c_str(), v);
        std::printf(" (%.1fs)\n", out.total_seconds);
        std::printf("artifacts in %s\n", opt.cfg.outdir.c_str());
        return 0;
    }

    if (analyze->parsed()) {
        const std::vector<std::string>& checkpoints = opt.checkpoints;
        const int layer = analyze->get_option("--layer")->as<int>();
        const int samples = analyze->get_option("--samples")->as<int>();
        const uint64_t seed = analyze->get_option("--seed")->as<uint64_t>();
        std::string outdir = analyze->get_option("--out")->as<std::string>();
        if (outdir.empty()) outdir = default_out_root() + "/analyze";
        inrfit::AnalyzeOutcome out = inrfit::run_analyze(checkpoints, layer, samples, seed, outdir);
        for (size_t i = 0; i < out.reports.size(); ++i)
            std::printf("checkpoint %zu: layer %d frobenius %.6f\n", i, layer, out.reports[i].frobenius);
        if (out.reduction_percent) std::printf("redundancy reduction: %.2f%%\n", *out.reduction_percent);
        std::printf("reports in %s\n", outdir.c_str());
        return 0;
    }

    if (dst->parsed()) {
        finalize_config(opt, *dst);
        const int coeffs = dst->get_option("--coeffs")->as<int>();
        if (opt.outdir.empty()) opt.outdir = default_out_root() + "/dst";
        opt.cfg.outdir = opt.outdir;
        opt.cfg.task = inrfit::Task::Image;
        inrfit::DstOutcome out = inrfit::run_dst(opt.cfg, coeffs);
        std::printf("dst m=%d mse=%.6e psnr=%.2f\n", out.coefficients, out.mse_value, out.psnr_value);
        std::printf("artifacts in %s\n", opt.cfg.outdir.c_str());
        return 0;
    }

    if (sweep->parsed()) {
        finalize_config(opt, *sweep);
        const std::string axis_name = sweep->get_option("--axis")->as<std::string>();
        const std::vector<double> values = sweep->get_option("--values")->as<std::vector<double>>();
        if (opt.outdir.empty())
            opt.outdir = default_out_root() + "/sweep_" + axis_name + "_" + opt.task + "_" + opt.cfg.kind;
        inrfit::ExperimentConfig base = opt.cfg;
        base.outdir = opt.outdir;
        const auto rows = inrfit::run_sweep(base, inrfit::sweep_axis_from_string(axis_name), values);
        std::printf("sweep over %s: %zu runs, results in %s/sweep.csv\n", axis_name.c_str(), rows.size(),
                    opt.outdir.c_str());
        return 0;
    }

    std::fprintf(stderr, "config error: no subcommand given (try --help)\n");
    return 2;
}

} // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // Keep large training matrices on the heap instead of cycling them through
    // mmap/munmap; the page-fault churn otherwise dominates small-epoch runs.
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    CLI::App app{"Implicit neural representation fitting with Nyquist-informed frequency multipliers"};
    app.require_subcommand(0, 1);
    CliOptions opt;

    CLI::App* train = app.add_subcommand("train", "Train an INR and write reconstruction + reports");
    add_model_options(train, opt);

    CLI::App* analyze = app.add_subcommand("analyze", "Hidden-feature covariance / redundancy analysis");
    analyze->add_option("checkpoints", opt.checkpoints, "One checkpoint, or baseline + FM checkpoint")
        ->expected(1, 2)
        ->required();
    analyze->add_option("--layer", "Layer index")->default_val(0);
    analyze->add_option("--samples", "Coordinate sample count")->default_val(10000);
    analyze->add_option("--seed", "Sampler seed")->default_val(0);
    analyze->add_option("--out", "Output directory")->default_val(std::string{});

    CLI::App* dst = app.add_subcommand("dst", "Truncated-DST baseline reconstruction of an image");
    add_model_options(dst, opt);
    dst->add_option("--coeffs", "Retained coefficient count M")->default_val(2049);

    CLI::App* sweep = app.add_subcommand("sweep", "Run a hyperparameter sweep and aggregate a CSV");
    add_model_options(sweep, opt);
    sweep->add_option("--axis", "Sweep axis: width|depth|nyquist_factor")->required();
    sweep->add_option("--values", "Axis values")->delimiter(',')->required()->expected(1, -1);

    // Later occurrences win, which is what lets explicit flags override spliced
    // config-file values (and lets wrapper scripts append overrides).
    for (CLI::App* sub : {train, analyze, dst, sweep})
        for (CLI::Option* o : sub->get_options())
            if (o->get_expected_max() == 1 && o->get_positional() == false) o->take_last();

    try {
        return dispatch(app, opt, argc, argv);
    } catch (const inrfit::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const inrfit::DivergedError& e) {
        std::fprintf(stderr, "diverged: %s\n", e.what());
        return 4;
    } catch (const inrfit::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
