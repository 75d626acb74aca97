#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "odct/matrix.hpp"
#include "odct/rng.hpp"

namespace odct {

struct EmbedderConfig {
    int d_in = 32;
    int d_feat = 32;
    int n_classes = 30;
    double learning_rate = 0.05;
    double sgd_momentum = 0.5;
    double weight_decay = 0.0;
    double dropout = 0.0;
};

/// One training example for the classification head.
struct LabeledInput {
    std::span<const double> input;
    int label = 0;
};

struct ForwardResult {
    std::vector<double> feature;  // pre head, feeds the memories
    std::vector<double> logits;
};

struct EmbedderGradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
};

/// Trainable feature extractor with a classification head:
///   feature = W1 x + b1;  logits = W2 drop(tanh(feature)) + b2.
/// The feature (the pre-head representation) is what the memories store.
/// Trained with SGD + momentum on mean cross-entropy against
/// pseudo-labels. forward() is pure eval-mode; dropout only acts inside
/// backward_step and draws from an internal stream.
class Embedder {
public:
    Embedder(const EmbedderConfig& cfg, std::uint64_t seed);

    /// Eval-mode forward pass; deterministic in state and input.
    /// Throws InputError on an input dimension mismatch.
    ForwardResult forward(std::span<const double> x) const;

    /// Mean cross-entropy loss and its parameter gradients on a batch,
    /// without updating anything. Dropout masks, when enabled, come from
    /// `dropout_rng` (required iff cfg.dropout > 0).
    double compute_gradients(std::span<const LabeledInput> batch, EmbedderGradients& out,
                             Rng* dropout_rng = nullptr) const;

    /// One SGD-with-momentum step on the batch; returns the pre-update
    /// loss. Throws InputError on an empty batch or an out-of-range label.
    double backward_step(std::span<const LabeledInput> batch);

    const EmbedderConfig& config() const { return cfg_; }

    // Direct parameter access for tests and initialization experiments.
    Matrix& w1() { return w1_; }
    std::vector<double>& b1() { return b1_; }
    Matrix& w2() { return w2_; }
    std::vector<double>& b2() { return b2_; }
    const Matrix& w1() const { return w1_; }
    const Matrix& w2() const { return w2_; }

    /// Versioned checkpoint of parameters, optimizer slots and
    /// hyperparameters; save -> load -> save is byte-identical.
    void save(const std::filesystem::path& path) const;
    static Embedder load(const std::filesystem::path& path);

private:
    Embedder() = default;

    EmbedderConfig cfg_;
    Matrix w1_;               // d_feat x d_in
    std::vector<double> b1_;  // d_feat
    Matrix w2_;               // n_classes x d_feat
    std::vector<double> b2_;  // n_classes

    Matrix v_w1_;
    std::vector<double> v_b1_;
    Matrix v_w2_;
    std::vector<double> v_b2_;

    Rng dropout_rng_{0};
};

/// Numerically stable mean cross-entropy of logits against a label.
double cross_entropy(std::span<const double> logits, int label);

}  // namespace odct
