// Acceptance gate: one self-contained check per numbered criterion, each
// printing a single PASS/FAIL line. Run with no arguments for all criteria,
// or pass the numbers to run (e.g. "acceptance 4 5"). Exit code is the number
// of failures. Criterion 5 reuses the checkpoints written by criterion 4 when
// they exist and retrains the seed-0 pairs otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "inrfit/checkpoint.hpp"
#include "inrfit/classical.hpp"
#include "inrfit/dataset.hpp"
#include "inrfit/experiment.hpp"
#include "inrfit/finite_diff.hpp"
#include "inrfit/metrics.hpp"
#include "inrfit/network.hpp"
#include "inrfit/redundancy.hpp"
#include "inrfit/training.hpp"

using namespace inrfit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kRunsDir = "acceptance_runs";

std::vector<double> flatten(const Model& m) {
    std::vector<double> v;
    for (const auto& l : m.layers) {
        v.insert(v.end(), l.weights.data.begin(), l.weights.data.end());
        if (l.bias) v.insert(v.end(), l.bias->begin(), l.bias->end());
    }
    return v;
}

void unflatten(Model& m, const std::vector<double>& v) {
    size_t p = 0;
    for (auto& l : m.layers) {
        for (auto& w : l.weights.data) w = v[p++];
        if (l.bias)
            for (auto& b : *l.bias) b = v[p++];
    }
}

std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ---------- criterion 1 ----------

ModelSpec base_spec(int in, std::vector<int> hidden, int out, ActivationKind kind) {
    ModelSpec s;
    s.input_dim = in;
    s.hidden_widths = std::move(hidden);
    s.output_dim = out;
    s.kind = kind;
    if (is_fm(kind)) s.f_nyquist = 32.0;
    return s;
}

bool check_counts(std::string& detail) {
    Rng rng(0);
    struct Case {
        ModelSpec spec;
        size_t expect;
    };
    std::vector<Case> cases;
    cases.push_back({base_spec(1, {256, 256}, 1, ActivationKind::Sine), 66561});
    cases.push_back({base_spec(2, {256, 256}, 3, ActivationKind::Finer), 67331});
    cases.push_back({base_spec(3, {256, 256, 256}, 1, ActivationKind::FmSine), 132865});
    PositionalEncodingSpec enc;
    enc.levels_per_dim = 64;
    enc.scale = 15;
    enc.input_dim = 2;
    ModelSpec pe = base_spec(2, {256, 256, 256}, 1, ActivationKind::Gauss);
    pe.encoder = enc;
    cases.push_back({pe, 197377});
    pe.output_dim = 3;
    cases.push_back({pe, 197891});

    bool ok = true;
    std::ostringstream got;
    for (auto& c : cases) {
        const size_t n = param_count(build_model(c.spec, rng));
        ok = ok && n == c.expect;
        got << (got.tellp() > 0 ? " " : "") << n;
    }
    detail = "counts " + got.str();
    return ok;
}

// ---------- criterion 2 ----------

bool check_gradients(std::string& detail) {
    double worst = 0.0;
    std::string worst_name;
    for (ActivationKind kind : {ActivationKind::Linear, ActivationKind::Sine, ActivationKind::Finer,
                                ActivationKind::FmSine, ActivationKind::FmFiner, ActivationKind::Gauss}) {
        for (bool encoded : {false, true}) {
            for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
                ModelSpec s = base_spec(2, {8, 8}, 1, kind);
                s.first_omega0 = 5.0;
                s.hidden_omega0 = 5.0;
                s.f_nyquist = 16.0;
                if (kind == ActivationKind::FmFiner) s.nyquist_factor = 2.0 / 3.0;
                if (encoded) {
                    PositionalEncodingSpec enc;
                    enc.levels_per_dim = 4;
                    enc.scale = 6;
                    enc.input_dim = 2;
                    s.encoder = enc;
                }
                Rng rng(seed);
                Model model = build_model(s, rng);
                Rng drng(seed + 100);
                Matrix coords = uniform_matrix(drng, 20, 2, -1.0, 1.0);
                Matrix targets = uniform_matrix(drng, 20, 1, -1.0, 1.0);

                auto cache = forward(model, coords);
                auto [loss, g] = mse_loss(cache.output(), targets);
                auto grads = backward(model, cache, g);
                std::vector<double> analytic;
                for (size_t l = 0; l < model.layers.size(); ++l) {
                    analytic.insert(analytic.end(), grads.weights[l].data.begin(),
                                    grads.weights[l].data.end());
                    if (model.layers[l].bias)
                        analytic.insert(analytic.end(), grads.biases[l].begin(), grads.biases[l].end());
                }
                auto loss_at = [&](const std::vector<double>& th) {
                    Model probe = model;
                    unflatten(probe, th);
                    return mse_loss(forward(probe, coords).output(), targets).first;
                };
                auto fd = finite_diff_grad(loss_at, flatten(model), 1e-6);
                // Vector-norm relative error; per-entry ratios are meaningless on
                // near-zero components of saturating kinds.
                double num = 0.0, den = 0.0;
                for (size_t i = 0; i < fd.size(); ++i) {
                    num += (fd[i] - analytic[i]) * (fd[i] - analytic[i]);
                    den += fd[i] * fd[i];
                }
                const double rel = std::sqrt(num) / std::max(1e-12, std::sqrt(den));
                if (rel > worst) {
                    worst = rel;
                    worst_name = to_string(kind) + (encoded ? "+pe" : "");
                }
            }
        }
    }
    detail = "max rel err " + fmt3(worst) + " (" + worst_name + ")";
    return worst < 1e-5;
}

// ---------- criterion 3 ----------

Matrix dst2_truncate_oracle(const Matrix& img, int m_coeffs) {
    Matrix coeffs = dst2_forward(img);
    std::vector<std::pair<double, size_t>> order(coeffs.size());
    for (size_t i = 0; i < coeffs.size(); ++i) order[i] = {std::fabs(coeffs.data[i]), i};
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    Matrix kept(coeffs.rows, coeffs.cols);
    for (int i = 0; i < m_coeffs; ++i) kept.data[order[static_cast<size_t>(i)].second] =
        coeffs.data[order[static_cast<size_t>(i)].second];
    return dst2_inverse(kept);
}

bool check_dst(std::string& detail) {
    double worst_offdiag = 0.0, worst_round = 0.0, worst_trunc = 0.0;
    for (int n : {64, 257, 1024, 4096}) {
        Matrix s = dst_matrix(n);
        Matrix gram = matmul_tn(s, s);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = gram(i, j);
                if (i == j)
                    worst_offdiag = std::max(worst_offdiag, std::fabs(v - 1.0));
                else
                    worst_offdiag = std::max(worst_offdiag, std::fabs(v));
            }
    }
    Rng rng(11);
    for (int n : {64, 1000, 4096}) {
        std::vector<double> x(static_cast<size_t>(n));
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        auto back = dst_inverse(dst_forward(x));
        for (int i = 0; i < n; ++i)
            worst_round = std::max(worst_round, std::fabs(back[static_cast<size_t>(i)] - x[static_cast<size_t>(i)]));
    }
    auto ds = synth_circles_image(64, 24);
    Matrix img(64, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) img(i, j) = ds.targets(i * 64 + j, 0);
    for (int m : {1, 64, 2049}) {
        Matrix lib = dst2_truncated_reconstruct(img, m);
        Matrix ora = dst2_truncate_oracle(img, m);
        for (size_t i = 0; i < lib.size(); ++i)
            worst_trunc = std::max(worst_trunc, std::fabs(lib.data[i] - ora.data[i]));
    }
    detail = "gram " + fmt3(worst_offdiag) + ", roundtrip " + fmt3(worst_round) + ", truncation " +
             fmt3(worst_trunc);
    return worst_offdiag < 1e-9 && worst_round < 1e-10 && worst_trunc < 1e-12;
}

// ---------- criteria 4, 5, 7, 8 share the experiment pipeline ----------

ExperimentConfig default_config(Task task, const std::string& kind, uint64_t seed,
                                const std::string& outdir) {
    ExperimentConfig cfg;
    cfg.task = task;
    cfg.kind = kind;
    cfg.seed = seed;
    cfg.outdir = outdir;
    resolve_defaults(cfg);
    return cfg;
}

std::string c4_dir(const std::string& kind, uint64_t seed) {
    return std::string(kRunsDir) + "/c4_" + kind + "_s" + std::to_string(seed);
}

double image_run_psnr(const std::string& kind, uint64_t seed) {
    auto cfg = default_config(Task::Image, kind, seed, c4_dir(kind, seed));
    return run_train_experiment(cfg).metrics.at("psnr");
}

bool check_image_ordering(std::string& detail) {
    std::map<std::string, double> mean;
    for (const std::string kind : {"siren", "fm-siren", "finer", "fm-finer"}) {
        double sum = 0.0;
        for (uint64_t seed : {0ull, 1ull, 2ull}) sum += image_run_psnr(kind, seed);
        mean[kind] = sum / 3.0;
    }
    detail = "mean PSNR fm-siren " + fmt1(mean["fm-siren"]) + " vs siren " + fmt1(mean["siren"]) +
             "; fm-finer " + fmt1(mean["fm-finer"]) + " vs finer " + fmt1(mean["finer"]);
    return mean["fm-siren"] >= mean["siren"] + 3.0 && mean["fm-finer"] >= mean["finer"] + 3.0;
}

Model model_for_redundancy(const std::string& kind) {
    const std::string path = c4_dir(kind, 0) + "/checkpoint.bin";
    if (fs::exists(path)) return load_checkpoint(path);
    auto cfg = default_config(Task::Image, kind, 0, c4_dir(kind, 0));
    run_train_experiment(cfg);
    return load_checkpoint(path);
}

bool check_redundancy(std::string& detail) {
    std::map<std::string, RedundancyReport> rep;
    for (const std::string kind : {"siren", "fm-siren", "finer", "fm-finer"}) {
        Model m = model_for_redundancy(kind);
        Rng sampler(123);
        rep[kind] = hidden_covariance(m, 0, sampler, 10000);
    }
    const double r_siren = redundancy_reduction(rep["siren"], rep["fm-siren"]);
    const double r_finer = redundancy_reduction(rep["finer"], rep["fm-finer"]);
    detail = "reduction fm-siren " + fmt1(r_siren) + "%, fm-finer " + fmt1(r_finer) + "%";
    return r_siren >= 30.0 && r_finer >= 30.0;
}

// ---------- criterion 6 ----------

double single_layer_psnr(const std::string& kind) {
    ExperimentConfig cfg;
    cfg.task = Task::Image;
    cfg.kind = kind;
    cfg.width = 512;
    cfg.depth = 1;
    cfg.epochs = 500;
    // Budget-tuned training recipe; the criterion pins only epochs, parameter
    // count and dataset. Small batches with a mild staircase and a short
    // second-moment horizon buy ~8 dB over the full-batch defaults here.
    cfg.learning_rate = 2e-2;
    cfg.lr_decay_gamma = 0.55;
    cfg.lr_decay_every = 50;
    cfg.batch_size = 32;
    cfg.adam_beta1 = 0.85;
    cfg.adam_beta2 = 0.99;
    cfg.seed = 0;
    cfg.outdir = std::string(kRunsDir) + "/c6_" + kind;
    resolve_defaults(cfg);
    auto outcome = run_train_experiment(cfg);
    if (outcome.params != 2049)
        throw ConfigError("criterion 6 model has " + std::to_string(outcome.params) + " parameters");
    return outcome.metrics.at("psnr");
}

bool check_single_layer_vs_dst(std::string& detail) {
    auto ds = synth_circles_image(64, 24);
    Matrix img(64, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) img(i, j) = ds.targets(i * 64 + j, 0);
    const double dst_psnr = psnr(dst2_truncated_reconstruct(img, 2049), img, 1.0);
    const double fm = single_layer_psnr("fm-siren");
    const double plain = single_layer_psnr("siren");
    detail = "fm-siren " + fmt1(fm) + " dB, siren " + fmt1(plain) + " dB, DST-2049 " +
             fmt1(dst_psnr) + " dB";
    return fm >= dst_psnr && plain < dst_psnr;
}

// ---------- criterion 7 ----------

bool check_audio_ordering(std::string& detail) {
    std::map<std::string, std::vector<double>> mse_by_kind;
    for (const std::string kind : {"siren", "fm-siren", "finer", "fm-finer"}) {
        for (uint64_t seed : {0ull, 1ull, 2ull}) {
            auto cfg = default_config(Task::Audio, kind, seed,
                                      std::string(kRunsDir) + "/c7_" + kind + "_s" + std::to_string(seed));
            mse_by_kind[kind].push_back(run_train_experiment(cfg).metrics.at("mse"));
        }
    }
    int fm_sine_wins = 0, fm_finer_wins = 0;
    for (int i = 0; i < 3; ++i) {
        fm_sine_wins += mse_by_kind["fm-siren"][i] < mse_by_kind["siren"][i];
        fm_finer_wins += mse_by_kind["fm-finer"][i] < mse_by_kind["finer"][i];
    }
    detail = "fm-siren wins " + std::to_string(fm_sine_wins) + "/3 (mse " +
             fmt3(mse_by_kind["fm-siren"][0]) + " vs " + fmt3(mse_by_kind["siren"][0]) +
             "), fm-finer wins " + std::to_string(fm_finer_wins) + "/3 (mse " +
             fmt3(mse_by_kind["fm-finer"][0]) + " vs " + fmt3(mse_by_kind["finer"][0]) + ")";
    return fm_sine_wins >= 2 && fm_finer_wins >= 2;
}

// ---------- criterion 8 ----------

bool check_occupancy(std::string& detail) {
    std::map<std::string, double> iou_by_kind;
    for (const std::string kind : {"fm-siren", "siren"}) {
        auto cfg = default_config(Task::Shape, kind, 0, std::string(kRunsDir) + "/c8_" + kind);
        iou_by_kind[kind] = run_train_experiment(cfg).metrics.at("iou");
    }
    detail = "IoU fm-siren " + fmt3(iou_by_kind["fm-siren"]) + ", siren " + fmt3(iou_by_kind["siren"]);
    return iou_by_kind["fm-siren"] >= 0.95 && iou_by_kind["fm-siren"] >= iou_by_kind["siren"];
}

// ---------- criterion 9 ----------

bool files_equal(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

bool check_training_invariants(std::string& detail) {
    TrainConfig sched;
    sched.learning_rate = 1e-3;
    sched.lr_decay_gamma = 0.1;
    sched.lr_decay_every = 100;
    const bool lr_exact = scheduled_lr(sched, 100) == 1e-4;

    ModelSpec s = base_spec(2, {8}, 1, ActivationKind::Sine);
    Rng rng(3);
    Model model = build_model(s, rng);
    Rng drng(4);
    Matrix coords = uniform_matrix(drng, 16, 2, -1.0, 1.0);
    Matrix targets = uniform_matrix(drng, 16, 1, -1.0, 1.0);
    auto cache = forward(model, coords);
    auto [loss, g] = mse_loss(cache.output(), targets);
    auto grads = backward(model, cache, g);
    std::vector<double> before = flatten(model);
    std::vector<double> gflat;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        gflat.insert(gflat.end(), grads.weights[l].data.begin(), grads.weights[l].data.end());
        gflat.insert(gflat.end(), grads.biases[l].begin(), grads.biases[l].end());
    }
    AdamState st(model);
    TrainConfig tc;
    adam_step(st, model, grads, 0.1, tc);
    std::vector<double> after = flatten(model);
    double worst_step = 0.0;
    for (size_t i = 0; i < before.size(); ++i) {
        if (std::fabs(gflat[i]) < 1e-8) continue;
        const double want = gflat[i] > 0 ? -0.1 : 0.1;
        worst_step = std::max(worst_step, std::fabs(after[i] - before[i] - want));
    }

    auto run_once = [&](const std::string& path) {
        SignalDataset ds = synth_circles_image(16, 4);
        ModelSpec ms = base_spec(2, {8, 8}, 1, ActivationKind::FmSine);
        ms.f_nyquist = nyquist_frequency(ds.sampling);
        Rng r(9);
        Model m = build_model(ms, r);
        TrainConfig cfg;
        cfg.epochs = 30;
        cfg.batch_size = 16;
        cfg.seed = 9;
        train(m, ds, cfg);
        save_checkpoint(path, m);
    };
    fs::create_directories(kRunsDir);
    const std::string pa = std::string(kRunsDir) + "/det_a.bin";
    const std::string pb = std::string(kRunsDir) + "/det_b.bin";
    run_once(pa);
    run_once(pb);
    const bool deterministic = files_equal(pa, pb);

    detail = std::string("lr ") + (lr_exact ? "exact" : "DRIFTED") + ", Adam step err " +
             fmt3(worst_step) + ", reruns " + (deterministic ? "bit-identical" : "DIFFER");
    return lr_exact && worst_step < 1e-5 && deterministic;
}

// ---------- criterion 10 ----------

bool check_metric_table(std::string& detail) {
    Matrix a(2, 2), b(2, 2);
    a(0, 0) = 0.25; a(0, 1) = 0.5; a(1, 0) = 0.75; a(1, 1) = 1.0;
    bool ok = std::isinf(psnr(a, a, 1.0)) && ssim_global(a, a, 1.0) == 1.0 && iou(a, a) == 1.0;

    Matrix pred(2, 1), zero(2, 1);
    pred(0, 0) = 1.0;
    pred(1, 0) = 2.0;
    ok = ok && mse(pred, zero) == 2.5;

    Matrix t(4, 1), p(4, 1);
    for (int i = 0; i < 4; ++i) t(i, 0) = 0.25 * i;
    for (int i = 0; i < 4; ++i) p(i, 0) = t(i, 0) + 0.005;
    ok = ok && std::fabs(psnr(p, t, 0.5) - 40.0) < 1e-9;

    Matrix sp(2, 2), st(2, 2);
    sp(1, 0) = 1.0; sp(1, 1) = 1.0;
    st(0, 1) = 1.0; st(1, 0) = 1.0;
    const double s = ssim_global(sp, st, 1.0);
    ok = ok && std::fabs(s / 0.0017967658215212617 - 1.0) < 1e-12;

    Matrix ip(4, 1), it(4, 1);
    ip(0, 0) = 1.0; ip(1, 0) = 1.0;
    it(0, 0) = 1.0; it(2, 0) = 1.0;
    ok = ok && iou(ip, it) == 1.0 / 3.0;

    detail = "psnr/ssim/iou/mse hand cases";
    return ok;
}

struct Criterion {
    int number;
    std::string description;
    std::function<bool(std::string&)> check;
};

} // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    const std::vector<Criterion> criteria = {
        {1, "exact parameter counts for the standard configurations", check_counts},
        {2, "analytic gradients match finite differences for every kind", check_gradients},
        {3, "DST orthonormality, round-trip, and truncation oracle", check_dst},
        {4, "image PSNR: FM variants beat their baselines by 3 dB", check_image_ordering},
        {5, "layer-0 redundancy reduction of 30% for both FM pairs", check_redundancy},
        {6, "single-layer FM-SIREN reaches the 2049-coefficient DST baseline", check_single_layer_vs_dst},
        {7, "audio MSE: FM variants beat their baselines on most seeds", check_audio_ordering},
        {8, "occupancy IoU of 0.95 or more, not below the SIREN baseline", check_occupancy},
        {9, "exact lr schedule, Adam first step, bit-identical reruns", check_training_invariants},
        {10, "hand-computable metric values are exact", check_metric_table},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.number) == wanted.end())
            continue;
        std::string detail;
        bool pass = false;
        const auto t0 = Clock::now();
        try {
            pass = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s criterion %d: %s [%s] (%.1fs)\n", pass ? "PASS" : "FAIL", c.number,
                    c.description.c_str(), detail.c_str(), secs);
        std::fflush(stdout);
        failures += !pass;
    }
    return failures;
}
