#include "odct/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "odct/binary.hpp"
#include "odct/error.hpp"

namespace odct {

namespace {

constexpr char kEmbedderMagic[] = "ODCEMB01";

void validate_config(const EmbedderConfig& cfg) {
    if (cfg.d_in <= 0 || cfg.d_feat <= 0 || cfg.n_classes <= 0) {
        throw InputError("embedder dimensions must be positive");
    }
    if (!(cfg.learning_rate > 0.0)) throw InputError("learning_rate must be positive");
    if (cfg.sgd_momentum < 0.0 || cfg.sgd_momentum >= 1.0) {
        throw InputError("sgd_momentum must lie in [0, 1)");
    }
    if (cfg.weight_decay < 0.0) throw InputError("weight_decay must be non-negative");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw InputError("dropout must lie in [0, 1)");
}

}  // namespace

double cross_entropy(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw InputError("label " + std::to_string(label) + " out of range for " +
                         std::to_string(logits.size()) + " classes");
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - max_logit);
    return std::log(sum) - (logits[static_cast<std::size_t>(label)] - max_logit);
}

Embedder::Embedder(const EmbedderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    validate_config(cfg);
    w1_ = Matrix(cfg.d_feat, cfg.d_in);
    b1_.assign(static_cast<std::size_t>(cfg.d_feat), 0.0);
    w2_ = Matrix(cfg.n_classes, cfg.d_feat);
    b2_.assign(static_cast<std::size_t>(cfg.n_classes), 0.0);
    v_w1_ = Matrix(cfg.d_feat, cfg.d_in);
    v_b1_.assign(b1_.size(), 0.0);
    v_w2_ = Matrix(cfg.n_classes, cfg.d_feat);
    v_b2_.assign(b2_.size(), 0.0);

    Rng init_rng(Rng::mix(seed ^ 0x5DEECE66Dull));
    init_rng.fill_normal(w1_.data(), 1.0 / std::sqrt(static_cast<double>(cfg.d_in)));
    init_rng.fill_normal(w2_.data(), 1.0 / std::sqrt(static_cast<double>(cfg.d_feat)));
    dropout_rng_ = Rng(Rng::mix(seed ^ 0xD1B54A32D192ED03ull));
}

ForwardResult Embedder::forward(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(cfg_.d_in)) {
        throw InputError("input has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(cfg_.d_in));
    }
    ForwardResult r;
    r.feature.resize(static_cast<std::size_t>(cfg_.d_feat));
    for (int j = 0; j < cfg_.d_feat; ++j) {
        r.feature[static_cast<std::size_t>(j)] = dot(w1_.row(j), x) + b1_[static_cast<std::size_t>(j)];
    }
    std::vector<double> hidden(r.feature.size());
    for (std::size_t j = 0; j < hidden.size(); ++j) hidden[j] = std::tanh(r.feature[j]);
    r.logits.resize(static_cast<std::size_t>(cfg_.n_classes));
    for (int c = 0; c < cfg_.n_classes; ++c) {
        r.logits[static_cast<std::size_t>(c)] = dot(w2_.row(c), hidden) + b2_[static_cast<std::size_t>(c)];
    }
    return r;
}

double Embedder::compute_gradients(std::span<const LabeledInput> batch, EmbedderGradients& out,
                                   Rng* dropout_rng) const {
    if (batch.empty()) throw InputError("gradient step requires a non-empty batch");
    out.w1 = Matrix(cfg_.d_feat, cfg_.d_in);
    out.b1.assign(static_cast<std::size_t>(cfg_.d_feat), 0.0);
    out.w2 = Matrix(cfg_.n_classes, cfg_.d_feat);
    out.b2.assign(static_cast<std::size_t>(cfg_.n_classes), 0.0);

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const bool use_dropout = cfg_.dropout > 0.0;
    if (use_dropout && dropout_rng == nullptr) {
        throw InputError("dropout is enabled but no rng was supplied");
    }
    const double keep = 1.0 - cfg_.dropout;

    double total_loss = 0.0;
    std::vector<double> hidden(static_cast<std::size_t>(cfg_.d_feat));
    std::vector<double> mask(static_cast<std::size_t>(cfg_.d_feat), 1.0);
    std::vector<double> probs(static_cast<std::size_t>(cfg_.n_classes));
    std::vector<double> d_hidden(static_cast<std::size_t>(cfg_.d_feat));

    for (const LabeledInput& ex : batch) {
        if (ex.label < 0 || ex.label >= cfg_.n_classes) {
            throw InputError("label " + std::to_string(ex.label) + " out of range for " +
                             std::to_string(cfg_.n_classes) + " classes");
        }
        ForwardResult fr = forward(ex.input);
        for (std::size_t j = 0; j < hidden.size(); ++j) hidden[j] = std::tanh(fr.feature[j]);
        if (use_dropout) {
            // Inverted dropout keeps eval-mode forward() scale-free.
            for (std::size_t j = 0; j < mask.size(); ++j) {
                mask[j] = dropout_rng->uniform() < cfg_.dropout ? 0.0 : 1.0 / keep;
            }
            std::vector<double> dropped(hidden.size());
            for (std::size_t j = 0; j < hidden.size(); ++j) dropped[j] = hidden[j] * mask[j];
            for (int c = 0; c < cfg_.n_classes; ++c) {
                fr.logits[static_cast<std::size_t>(c)] =
                    dot(w2_.row(c), dropped) + b2_[static_cast<std::size_t>(c)];
            }
            hidden.swap(dropped);
        }
        total_loss += cross_entropy(fr.logits, ex.label);

        // Softmax probabilities, then dlogits = probs - onehot(label).
        double max_logit = *std::max_element(fr.logits.begin(), fr.logits.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < probs.size(); ++c) {
            probs[c] = std::exp(fr.logits[c] - max_logit);
            sum += probs[c];
        }
        for (double& p : probs) p /= sum;
        probs[static_cast<std::size_t>(ex.label)] -= 1.0;

        std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
        for (int c = 0; c < cfg_.n_classes; ++c) {
            const double g = probs[static_cast<std::size_t>(c)] * inv_n;
            out.b2[static_cast<std::size_t>(c)] += g;
            std::span<double> gw2 = out.w2.row(c);
            std::span<const double> w2row = w2_.row(c);
            for (std::size_t j = 0; j < hidden.size(); ++j) {
                gw2[j] += g * hidden[j];
                d_hidden[j] += g * w2row[j];
            }
        }
        for (int j = 0; j < cfg_.d_feat; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            double dh = d_hidden[js];
            if (use_dropout) dh *= mask[js];
            const double t = std::tanh(fr.feature[js]);
            const double d_pre = dh * (1.0 - t * t);
            out.b1[js] += d_pre;
            std::span<double> gw1 = out.w1.row(j);
            for (std::size_t i = 0; i < gw1.size(); ++i) gw1[i] += d_pre * ex.input[i];
        }
    }
    return total_loss * inv_n;
}

double Embedder::backward_step(std::span<const LabeledInput> batch) {
    EmbedderGradients g;
    const double loss = compute_gradients(batch, g, cfg_.dropout > 0.0 ? &dropout_rng_ : nullptr);

    auto apply = [&](std::span<double> w, std::span<double> v, std::span<const double> grad,
                     bool decay) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            double step = grad[i];
            if (decay && cfg_.weight_decay > 0.0) step += cfg_.weight_decay * w[i];
            v[i] = cfg_.sgd_momentum * v[i] + step;
            w[i] -= cfg_.learning_rate * v[i];
        }
    };
    apply(w1_.data(), v_w1_.data(), g.w1.data(), true);
    apply(b1_, v_b1_, g.b1, false);
    apply(w2_.data(), v_w2_.data(), g.w2.data(), true);
    apply(b2_, v_b2_, g.b2, false);
    return loss;
}

void Embedder::save(const std::filesystem::path& path) const {
    BinWriter w(path);
    w.magic(kEmbedderMagic);
    w.i32(cfg_.d_in);
    w.i32(cfg_.d_feat);
    w.i32(cfg_.n_classes);
    w.f64(cfg_.learning_rate);
    w.f64(cfg_.sgd_momentum);
    w.f64(cfg_.weight_decay);
    w.f64(cfg_.dropout);
    w.str(dropout_rng_.state_string());
    auto dump = [&](const Matrix& m) { w.f64_span(m.data()); };
    dump(w1_);
    w.f64_span(b1_);
    dump(w2_);
    w.f64_span(b2_);
    dump(v_w1_);
    w.f64_span(v_b1_);
    dump(v_w2_);
    w.f64_span(v_b2_);
    w.finish();
}

Embedder Embedder::load(const std::filesystem::path& path) {
    BinReader r(path);
    r.expect_magic(kEmbedderMagic);
    EmbedderConfig cfg;
    cfg.d_in = r.i32();
    cfg.d_feat = r.i32();
    cfg.n_classes = r.i32();
    cfg.learning_rate = r.f64();
    cfg.sgd_momentum = r.f64();
    cfg.weight_decay = r.f64();
    cfg.dropout = r.f64();
    validate_config(cfg);
    Embedder e;
    e.cfg_ = cfg;
    e.dropout_rng_ = Rng::from_state_string(r.str());
    auto read_matrix = [&](int rows, int cols) {
        Matrix m(rows, cols);
        r.f64_span(m.data());
        return m;
    };
    auto read_vec = [&](int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        r.f64_span(v);
        return v;
    };
    e.w1_ = read_matrix(cfg.d_feat, cfg.d_in);
    e.b1_ = read_vec(cfg.d_feat);
    e.w2_ = read_matrix(cfg.n_classes, cfg.d_feat);
    e.b2_ = read_vec(cfg.n_classes);
    e.v_w1_ = read_matrix(cfg.d_feat, cfg.d_in);
    e.v_b1_ = read_vec(cfg.d_feat);
    e.v_w2_ = read_matrix(cfg.n_classes, cfg.d_feat);
    e.v_b2_ = read_vec(cfg.n_classes);
    return e;
}

}  // namespace odct
