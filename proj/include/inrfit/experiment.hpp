#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "inrfit/checkpoint.hpp"
#include "inrfit/classical.hpp"
#include "inrfit/dataset.hpp"
#include "inrfit/errors.hpp"
#include "inrfit/metrics.hpp"
#include "inrfit/network.hpp"
#include "inrfit/occupancy.hpp"
#include "inrfit/pnm.hpp"
#include "inrfit/redundancy.hpp"
#include "inrfit/training.hpp"
#include "inrfit/wav.hpp"

namespace inrfit {

enum class Task { Audio, Image, Shape };

inline std::string to_string(Task t) {
    switch (t) {
        case Task::Audio: return "audio";
        case Task::Image: return "image";
        case Task::Shape: return "shape";
    }
    return "?";
}

inline Task task_from_string(const std::string& s) {
    if (s == "audio") return Task::Audio;
    if (s == "image") return Task::Image;
    if (s == "shape") return Task::Shape;
    throw ConfigError("unknown task '" + s + "' (expected audio|image|shape)");
}

// Full experiment description. Optionals start unset and are materialized by
// resolve_defaults from the per-task/per-model hyperparameter tables, so a
// resolved config (as echoed in the manifest) pins every effective value.
struct ExperimentConfig {
    Task task = Task::Image;
    std::string kind = "fm-siren"; // siren|finer|fm-siren|fm-finer|gauss|pe

    int width = 256;
    std::optional<int> depth; // hidden layers; default 2 (audio/image) or 3 (shape)

    std::optional<double> omega0_first;
    std::optional<double> omega0_hidden;
    double gauss_scale = 16.0;
    int pe_scale = 15;
    std::optional<double> nyquist_factor; // default 1 (fm-siren), 2/3 (fm-finer)
    double angular_scale = 3.14159265358979323846;
    int k_offset = 0;
    bool first_layer_only = false;

    std::optional<double> learning_rate; // default 1e-4 audio, 1e-3 image/shape
    std::optional<int> epochs;           // default 500 audio/image, 75 shape
    double lr_decay_gamma = 0.1;
    int lr_decay_every = 100;
    std::optional<int> batch_size; // default: full batch; shape defaults to 32768
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;

    std::string input_path; // optional WAV / PGM / PPM / occupancy file

    // synthetic dataset parameters
    double audio_duration = 1.0;
    double audio_rate = 4000.0;
    std::vector<std::pair<double, double>> audio_components = {{200.0, 0.5}, {650.0, 0.3}, {1500.0, 0.2}};
    int image_size = 64;
    int image_rings = 24;
    int shape_resolution = 64;
    std::string shape_kind = "sphere"; // sphere|torus
    double sphere_radius = 0.5;
    double torus_major = 0.6;
    double torus_minor = 0.25;

    std::string outdir;
};

inline bool kind_is_valid(const std::string& kind) {
    return kind == "siren" || kind == "finer" || kind == "fm-siren" || kind == "fm-finer" ||
           kind == "gauss" || kind == "pe";
}

inline ActivationKind activation_for_kind(const std::string& kind) {
    if (kind == "siren") return ActivationKind::Sine;
    if (kind == "finer") return ActivationKind::Finer;
    if (kind == "fm-siren") return ActivationKind::FmSine;
    if (kind == "fm-finer") return ActivationKind::FmFiner;
    if (kind == "gauss" || kind == "pe") return ActivationKind::Gauss;
    throw ConfigError("unknown model kind '" + kind + "' (expected siren|finer|fm-siren|fm-finer|gauss|pe)");
}

// Materialize every unset hyperparameter from the per-signal-family defaults.
inline void resolve_defaults(ExperimentConfig& cfg) {
    if (!kind_is_valid(cfg.kind))
        throw ConfigError("unknown model kind '" + cfg.kind + "' (expected siren|finer|fm-siren|fm-finer|gauss|pe)");
    if (cfg.width < 1) throw ConfigError("width must be >= 1");

    const bool finer_family = cfg.kind == "finer" || cfg.kind == "fm-finer";
    if (!cfg.depth) cfg.depth = cfg.task == Task::Shape ? 3 : 2;
    if (*cfg.depth < 1) throw ConfigError("depth must be >= 1");

    double default_omega = 30.0;
    if (cfg.task == Task::Audio) default_omega = finer_family ? 700.0 : 800.0;
    if (!cfg.omega0_first) cfg.omega0_first = default_omega;
    if (!cfg.omega0_hidden) cfg.omega0_hidden = default_omega;

    if (!cfg.nyquist_factor) cfg.nyquist_factor = cfg.kind == "fm-finer" ? 2.0 / 3.0 : 1.0;
    if (!(*cfg.nyquist_factor > 0.0) || *cfg.nyquist_factor > 1.0)
        throw ConfigError("nyquist_factor must be in (0, 1]");

    if (!cfg.learning_rate) cfg.learning_rate = cfg.task == Task::Audio ? 1e-4 : 1e-3;
    if (!cfg.epochs) cfg.epochs = cfg.task == Task::Shape ? 75 : 500;
    if (cfg.task == Task::Shape && !cfg.batch_size) cfg.batch_size = 32768;
}

inline int task_input_dim(Task t) {
    switch (t) {
        case Task::Audio: return 1;
        case Task::Image: return 2;
        case Task::Shape: return 3;
    }
    return 0;
}

inline SignalDataset build_dataset(const ExperimentConfig& cfg) {
    switch (cfg.task) {
        case Task::Audio:
            if (!cfg.input_path.empty()) return load_wav(cfg.input_path);
            return synth_audio(cfg.audio_duration, cfg.audio_rate, cfg.audio_components);
        case Task::Image:
            if (!cfg.input_path.empty()) return load_image(cfg.input_path);
            return synth_circles_image(cfg.image_size, cfg.image_rings);
        case Task::Shape: {
            if (!cfg.input_path.empty()) return occupancy_to_dataset(load_occupancy(cfg.input_path));
            ShapeSpec shape;
            if (cfg.shape_kind == "sphere") {
                shape.kind = ShapeSpec::Kind::Sphere;
                shape.radius = cfg.sphere_radius;
            } else if (cfg.shape_kind == "torus") {
                shape.kind = ShapeSpec::Kind::Torus;
                shape.major_r = cfg.torus_major;
                shape.minor_r = cfg.torus_minor;
            } else {
                throw ConfigError("unknown shape kind '" + cfg.shape_kind + "' (expected sphere|torus)");
            }
            return occupancy_to_dataset(synth_occupancy(cfg.shape_resolution, shape));
        }
    }
    throw ConfigError("invalid task");
}

// Model spec for a resolved config and its dataset.
inline ModelSpec model_spec_for(const ExperimentConfig& cfg, const SignalDataset& ds) {
    ModelSpec spec;
    spec.input_dim = task_input_dim(cfg.task);
    spec.output_dim = ds.targets.cols;
    // The printed PE parameter counts imply one extra hidden bank: the
    // encoder replaces the usual first affine layer rather than feeding it.
    const int banks = cfg.kind == "pe" ? *cfg.depth + 1 : *cfg.depth;
    spec.hidden_widths.assign(static_cast<size_t>(banks), cfg.width);
    spec.kind = activation_for_kind(cfg.kind);
    spec.first_omega0 = *cfg.omega0_first;
    spec.hidden_omega0 = *cfg.omega0_hidden;
    spec.gauss_scale = cfg.gauss_scale;
    spec.nyquist_factor = *cfg.nyquist_factor;
    spec.angular_scale = cfg.angular_scale;
    spec.k_offset = cfg.k_offset;
    spec.first_layer_only = cfg.first_layer_only;
    if (is_fm(spec.kind)) spec.f_nyquist = nyquist_frequency(ds.sampling);
    if (cfg.kind == "pe") {
        PositionalEncodingSpec enc;
        enc.input_dim = spec.input_dim;
        enc.levels_per_dim = std::max(1, 128 / spec.input_dim); // total_embed 256 for d=1,2
        enc.scale = cfg.pe_scale;
        spec.encoder = enc;
    }
    return spec;
}

// Forward in fixed-size chunks so shape-task grids do not hold every layer
// activation at once.
inline Matrix predict(const Model& model, const Matrix& coords, int chunk = 32768) {
    if (coords.rows <= chunk) return forward(model, coords).output();
    Matrix out;
    for (int begin = 0; begin < coords.rows; begin += chunk) {
        const int end = std::min(begin + chunk, coords.rows);
        Matrix part(end - begin, coords.cols);
        for (int i = begin; i < end; ++i) {
            const double* s = coords.row(i);
            double* d = part.row(i - begin);
            for (int j = 0; j < coords.cols; ++j) d[j] = s[j];
        }
        Matrix pred = forward(model, part).output();
        if (out.rows == 0) out = Matrix(coords.rows, pred.cols);
        for (int i = begin; i < end; ++i) {
            const double* s = pred.row(i - begin);
            double* d = out.row(i);
            for (int j = 0; j < out.cols; ++j) d[j] = s[j];
        }
    }
    return out;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

struct TrainOutcome {
    RunReport report;
    std::map<std::string, double> metrics;
    size_t params = 0;
    double total_seconds = 0.0;
    std::string checkpoint_path;
    std::string artifact_path;
};

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["task"] = to_string(cfg.task);
    j["kind"] = cfg.kind;
    j["width"] = cfg.width;
    j["depth"] = cfg.depth ? nlohmann::json(*cfg.depth) : nlohmann::json();
    j["omega0_first"] = cfg.omega0_first ? nlohmann::json(*cfg.omega0_first) : nlohmann::json();
    j["omega0_hidden"] = cfg.omega0_hidden ? nlohmann::json(*cfg.omega0_hidden) : nlohmann::json();
    j["gauss_scale"] = cfg.gauss_scale;
    j["pe_scale"] = cfg.pe_scale;
    j["nyquist_factor"] = cfg.nyquist_factor ? nlohmann::json(*cfg.nyquist_factor) : nlohmann::json();
    j["angular_scale"] = cfg.angular_scale;
    j["k_offset"] = cfg.k_offset;
    j["first_layer_only"] = cfg.first_layer_only;
    j["learning_rate"] = cfg.learning_rate ? nlohmann::json(*cfg.learning_rate) : nlohmann::json();
    j["epochs"] = cfg.epochs ? nlohmann::json(*cfg.epochs) : nlohmann::json();
    j["lr_decay_gamma"] = cfg.lr_decay_gamma;
    j["lr_decay_every"] = cfg.lr_decay_every;
    j["batch_size"] = cfg.batch_size ? nlohmann::json(*cfg.batch_size) : nlohmann::json("full");
    j["adam_beta1"] = cfg.adam_beta1;
    j["adam_beta2"] = cfg.adam_beta2;
    j["adam_eps"] = cfg.adam_eps;
    j["seed"] = cfg.seed;
    j["input_path"] = cfg.input_path;
    j["audio_duration"] = cfg.audio_duration;
    j["audio_rate"] = cfg.audio_rate;
    auto comps = nlohmann::json::array();
    for (const auto& [f, a] : cfg.audio_components) comps.push_back({{"freq", f}, {"amp", a}});
    j["audio_components"] = comps;
    j["image_size"] = cfg.image_size;
    j["image_rings"] = cfg.image_rings;
    j["shape_resolution"] = cfg.shape_resolution;
    j["shape_kind"] = cfg.shape_kind;
    j["sphere_radius"] = cfg.sphere_radius;
    j["torus_major"] = cfg.torus_major;
    j["torus_minor"] = cfg.torus_minor;
    j["outdir"] = cfg.outdir;
    return j;
}

inline void write_loss_history(const std::string& path, const RunReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path);
    out << "epoch,lr,loss,seconds\n";
    for (size_t e = 0; e < report.loss.size(); ++e)
        out << e << "," << detail::fmt_double(report.lr[e]) << "," << detail::fmt_double(report.loss[e])
            << "," << detail::fmt_double(report.seconds[e]) << "\n";
}

inline void write_metrics_csv(const std::string& path, const std::map<std::string, double>& metrics) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path);
    bool first = true;
    for (const auto& [k, v] : metrics) {
        (void)v;
        out << (first ? "" : ",") << k;
        first = false;
    }
    out << "\n";
    first = true;
    for (const auto& [k, v] : metrics) {
        (void)k;
        out << (first ? "" : ",") << detail::fmt_double(v);
        first = false;
    }
    out << "\n";
}

// Train one experiment and write reconstruction, metrics CSV, loss history,
// manifest, and checkpoint into cfg.outdir. cfg must already be resolved.
inline TrainOutcome run_train_experiment(const ExperimentConfig& cfg) {
    if (cfg.outdir.empty()) throw ConfigError("run_train_experiment: outdir is empty");
    std::filesystem::create_directories(cfg.outdir);
    const std::string dir = cfg.outdir + "/";

    SignalDataset ds = build_dataset(cfg);
    ModelSpec spec = model_spec_for(cfg, ds);
    Rng rng(cfg.seed);
    Model model = build_model(spec, rng);

    TrainConfig tc;
    tc.learning_rate = *cfg.learning_rate;
    tc.epochs = *cfg.epochs;
    tc.lr_decay_gamma = cfg.lr_decay_gamma;
    tc.lr_decay_every = cfg.lr_decay_every;
    tc.batch_size = cfg.batch_size;
    tc.adam_beta1 = cfg.adam_beta1;
    tc.adam_beta2 = cfg.adam_beta2;
    tc.adam_eps = cfg.adam_eps;
    tc.seed = cfg.seed;

    TrainOutcome outcome;
    outcome.params = param_count(model);
    outcome.report = train(model, ds, tc);
    for (double s : outcome.report.seconds) outcome.total_seconds += s;

    Matrix pred = predict(model, ds.coords);
    const double max_value = ds.value_max - ds.value_min;
    outcome.metrics["mse"] = mse(pred, ds.targets);
    if (cfg.task == Task::Image) {
        outcome.metrics["psnr"] = psnr(pred, ds.targets, max_value);
        outcome.metrics["ssim"] = ssim_global(pred, ds.targets, max_value);
    } else if (cfg.task == Task::Shape) {
        outcome.metrics["iou"] = iou(pred, ds.targets);
    }

    if (cfg.task == Task::Audio) {
        std::vector<double> samples(pred.data);
        for (auto& v : samples) v = std::clamp(v, -1.0, 32767.0 / 32768.0);
        const int rate = static_cast<int>(ds.sampling.sample_rate.value_or(4000.0));
        outcome.artifact_path = dir + "recon.wav";
        save_wav(outcome.artifact_path, samples, rate);
    } else if (cfg.task == Task::Image) {
        Matrix clamped = pred;
        for (auto& v : clamped.data) v = std::clamp(v, 0.0, 1.0);
        const int h = ds.sampling.sample_counts[0], w = ds.sampling.sample_counts[1];
        outcome.artifact_path = dir + (pred.cols == 3 ? "recon.ppm" : "recon.pgm");
        save_image(outcome.artifact_path, clamped, h, w);
    } else {
        const int res = ds.sampling.sample_counts[0];
        outcome.artifact_path = dir + "recon.occ";
        save_occupancy(outcome.artifact_path, grid_from_predictions(pred, res));
    }

    outcome.checkpoint_path = dir + "checkpoint.bin";
    save_checkpoint(outcome.checkpoint_path, model);
    write_loss_history(dir + "loss_history.csv", outcome.report);
    write_metrics_csv(dir + "metrics.csv", outcome.metrics);

    nlohmann::json manifest;
    manifest["config"] = config_to_json(cfg);
    manifest["param_count"] = outcome.params;
    manifest["metrics"] = outcome.metrics;
    manifest["f_nyquist"] = nyquist_frequency(ds.sampling);
    manifest["artifacts"] = {{"reconstruction", std::filesystem::path(outcome.artifact_path).filename().string()},
                             {"checkpoint", "checkpoint.bin"},
                             {"loss_history", "loss_history.csv"},
                             {"metrics", "metrics.csv"}};
    manifest["versions"] = {{"checkpoint", kCheckpointVersion}, {"manifest", 1}};
    std::ofstream mf(dir + "manifest.json");
    if (!mf) throw DataError("cannot open " + dir + "manifest.json");
    mf << manifest.dump(2) << "\n";

    return outcome;
}

struct AnalyzeOutcome {
    std::vector<RedundancyReport> reports;
    std::optional<double> reduction_percent;
};

inline void write_covariance_csv(const std::string& path, const Matrix& cov) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path);
    for (int i = 0; i < cov.rows; ++i) {
        for (int j = 0; j < cov.cols; ++j) out << (j ? "," : "") << detail::fmt_double(cov(i, j));
        out << "\n";
    }
}

// Covariance analysis of one or two checkpoints; with two, the second is
// treated as the FM variant and a reduction percentage is reported.
inline AnalyzeOutcome run_analyze(const std::vector<std::string>& checkpoints, int layer, int n_samples,
                                  uint64_t seed, const std::string& outdir) {
    if (checkpoints.empty() || checkpoints.size() > 2)
        throw ConfigError("analyze: expected 1 or 2 checkpoints, got " + std::to_string(checkpoints.size()));
    if (outdir.empty()) throw ConfigError("analyze: outdir is empty");
    std::filesystem::create_directories(outdir);
    const std::string dir = outdir + "/";

    AnalyzeOutcome outcome;
    for (size_t i = 0; i < checkpoints.size(); ++i) {
        Model model = load_checkpoint(checkpoints[i]);
        Rng sampler(seed);
        outcome.reports.push_back(hidden_covariance(model, layer, sampler, n_samples));
        write_covariance_csv(dir + "covariance_" + std::to_string(i) + ".csv",
                             outcome.reports.back().covariance);
    }
    nlohmann::json summary;
    summary["layer"] = layer;
    summary["n_samples"] = n_samples;
    summary["seed"] = seed;
    auto fr = nlohmann::json::array();
    for (const auto& r : outcome.reports) fr.push_back(r.frobenius);
    summary["frobenius"] = fr;
    if (outcome.reports.size() == 2) {
        if (outcome.reports[0].covariance.rows != outcome.reports[1].covariance.rows)
            throw ConfigError("analyze: checkpoints have different layer widths (" +
                              std::to_string(outcome.reports[0].covariance.rows) + " vs " +
                              std::to_string(outcome.reports[1].covariance.rows) + ")");
        outcome.reduction_percent = redundancy_reduction(outcome.reports[0], outcome.reports[1]);
        summary["reduction_percent"] = *outcome.reduction_percent;
    }
    std::ofstream sf(dir + "analysis.json");
    if (!sf) throw DataError("cannot open " + dir + "analysis.json");
    sf << summary.dump(2) << "\n";
    return outcome;
}

struct DstOutcome {
    double mse_value = 0.0;
    double psnr_value = 0.0;
    int coefficients = 0;
};

// Truncated-DST baseline on an image dataset; writes the reconstruction and
// a one-row CSV (m, mse, psnr).
inline DstOutcome run_dst(const ExperimentConfig& cfg, int m_coeffs) {
    if (cfg.task != Task::Image) throw ConfigError("dst: only the image task has a DST baseline");
    if (cfg.outdir.empty()) throw ConfigError("dst: outdir is empty");
    std::filesystem::create_directories(cfg.outdir);
    const std::string dir = cfg.outdir + "/";

    SignalDataset ds = build_dataset(cfg);
    const int h = ds.sampling.sample_counts[0], w = ds.sampling.sample_counts[1];
    if (ds.targets.cols != 1) throw ConfigError("dst: grayscale input required");
    if (m_coeffs < 1 || m_coeffs > h * w)
        throw ConfigError("dst: M=" + std::to_string(m_coeffs) + " outside [1, " + std::to_string(h * w) + "]");

    Matrix img(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) img(i, j) = ds.targets(i * w + j, 0);
    Matrix rec = dst2_truncated_reconstruct(img, m_coeffs);
    Matrix rec_flat(h * w, 1);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) rec_flat(i * w + j, 0) = rec(i, j);

    DstOutcome outcome;
    outcome.coefficients = m_coeffs;
    outcome.mse_value = mse(rec_flat, ds.targets);
    outcome.psnr_value = psnr(rec_flat, ds.targets, ds.value_max - ds.value_min);

    Matrix clamped = rec_flat;
    for (auto& v : clamped.data) v = std::clamp(v, 0.0, 1.0);
    save_image(dir + "dst_recon.pgm", clamped, h, w);
    std::ofstream out(dir + "dst_metrics.csv");
    if (!out) throw DataError("cannot open " + dir + "dst_metrics.csv");
    out << "m,mse,psnr\n"
        << m_coeffs << "," << detail::fmt_double(outcome.mse_value) << ","
        << detail::fmt_double(outcome.psnr_value) << "\n";
    return outcome;
}

enum class SweepAxis { Width, Depth, NyquistFactor };

inline SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "width") return SweepAxis::Width;
    if (s == "depth") return SweepAxis::Depth;
    if (s == "nyquist_factor") return SweepAxis::NyquistFactor;
    throw ConfigError("unknown sweep axis '" + s + "' (expected width|depth|nyquist_factor)");
}

struct SweepRow {
    double value = 0.0;
    size_t params = 0;
    double final_loss = 0.0;
    std::map<std::string, double> metrics;
    double seconds = 0.0;
};

// One training run per axis value, aggregated into sweep.csv.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                       const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep: empty value list");
    if (base.outdir.empty()) throw ConfigError("sweep: outdir is empty");
    std::filesystem::create_directories(base.outdir);

    std::vector<SweepRow> rows;
    for (double value : values) {
        ExperimentConfig cfg = base;
        char sub[64];
        switch (axis) {
            case SweepAxis::Width:
                if (value < 1 || value != std::floor(value)) throw ConfigError("sweep: width must be a positive integer");
                cfg.width = static_cast<int>(value);
                std::snprintf(sub, sizeof sub, "width_%d", cfg.width);
                break;
            case SweepAxis::Depth:
                if (value < 1 || value != std::floor(value)) throw ConfigError("sweep: depth must be a positive integer");
                cfg.depth = static_cast<int>(value);
                std::snprintf(sub, sizeof sub, "depth_%d", *cfg.depth);
                break;
            case SweepAxis::NyquistFactor:
                cfg.nyquist_factor = value;
                std::snprintf(sub, sizeof sub, "nyquist_%g", value);
                break;
        }
        cfg.outdir = base.outdir + "/" + sub;
        resolve_defaults(cfg);
        TrainOutcome out = run_train_experiment(cfg);
        SweepRow row;
        row.value = value;
        row.params = out.params;
        row.final_loss = out.report.loss.empty() ? 0.0 : out.report.loss.back();
        row.metrics = out.metrics;
        row.seconds = out.total_seconds;
        rows.push_back(std::move(row));
    }

    const std::string key_metric = base.task == Task::Image  ? "psnr"
                                   : base.task == Task::Shape ? "iou"
                                                              : "mse";
    std::ofstream out(base.outdir + "/sweep.csv");
    if (!out) throw DataError("cannot open " + base.outdir + "/sweep.csv");
    out << "value,param_count,final_loss," << key_metric << ",seconds\n";
    for (const auto& row : rows) {
        const auto it = row.metrics.find(key_metric);
        out << detail::fmt_double(row.value) << "," << row.params << "," << detail::fmt_double(row.final_loss)
            << "," << detail::fmt_double(it == row.metrics.end() ? 0.0 : it->second) << ","
            << detail::fmt_double(row.seconds) << "\n";
    }
    return rows;
}

} // namespace inrfit
