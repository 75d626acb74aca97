#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "odct/embedder.hpp"
#include "odct/error.hpp"
#include "odct/matrix.hpp"
#include "odct/rng.hpp"

using namespace odct;

namespace {

EmbedderConfig tiny_config(int d_in = 3, int d_feat = 4, int n_classes = 3) {
    EmbedderConfig cfg;
    cfg.d_in = d_in;
    cfg.d_feat = d_feat;
    cfg.n_classes = n_classes;
    cfg.learning_rate = 0.05;
    return cfg;
}

std::vector<LabeledInput> make_batch(const std::vector<std::vector<double>>& xs,
                                     const std::vector<int>& labels) {
    std::vector<LabeledInput> batch;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        batch.push_back({std::span<const double>(xs[i]), labels[i]});
    }
    return batch;
}

// Mean batch loss evaluated from scratch; the finite-difference target.
double batch_loss(const Embedder& e, std::span<const LabeledInput> batch) {
    double total = 0.0;
    for (const auto& ex : batch) total += cross_entropy(e.forward(ex.input).logits, ex.label);
    return total / static_cast<double>(batch.size());
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("forward produces the configured shapes and is pure") {
    const Embedder e(tiny_config(5, 7, 4), 11);
    const std::vector<double> x = {0.1, -0.2, 0.3, 0.0, 1.5};
    const auto a = e.forward(x);
    CHECK(a.feature.size() == 7);
    CHECK(a.logits.size() == 4);
    const auto b = e.forward(x);
    CHECK(a.feature == b.feature);
    CHECK(a.logits == b.logits);
}

TEST_CASE("forward rejects a wrong input dimension") {
    const Embedder e(tiny_config(), 1);
    const std::vector<double> bad = {1.0, 2.0};
    CHECK_THROWS_AS(e.forward(bad), InputError);
}

TEST_CASE("zero weights reduce forward to the bias vectors") {
    Embedder e(tiny_config(3, 4, 2), 5);
    std::fill(e.w1().data().begin(), e.w1().data().end(), 0.0);
    std::fill(e.w2().data().begin(), e.w2().data().end(), 0.0);
    e.b1() = {0.5, -1.0, 0.0, 2.0};
    e.b2() = {0.25, -0.75};

    const std::vector<double> x = {3.0, -2.0, 7.0};
    const auto out = e.forward(x);
    CHECK(out.feature == std::vector<double>{0.5, -1.0, 0.0, 2.0});
    CHECK(out.logits == std::vector<double>{0.25, -0.75});
}

TEST_CASE("an identity first layer passes the input through as the feature") {
    Embedder e(tiny_config(4, 4, 2), 5);
    std::fill(e.w1().data().begin(), e.w1().data().end(), 0.0);
    for (int d = 0; d < 4; ++d) e.w1().at(d, d) = 1.0;
    e.b1().assign(4, 0.0);

    const std::vector<double> x = {1.0, 0.0, 0.0, 0.0};
    CHECK(e.forward(x).feature == x);
}

TEST_CASE("cross_entropy of uniform logits is ln C") {
    const std::vector<double> logits(6, 0.7);
    CHECK(cross_entropy(logits, 2) == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy of a confidently correct prediction approaches 0") {
    const std::vector<double> logits = {30.0, 0.0, 0.0};
    CHECK(cross_entropy(logits, 0) < 1e-12);
    CHECK(cross_entropy(logits, 1) > 29.0);  // confidently wrong is expensive
}

TEST_CASE("cross_entropy is stable for extreme logits") {
    const std::vector<double> logits = {1e4, -1e4, 0.0};
    const double v = cross_entropy(logits, 0);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng data_rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const int d_in = 2 + static_cast<int>(data_rng.uniform_int(3));
        const int d_feat = 2 + static_cast<int>(data_rng.uniform_int(3));
        const int n_classes = 2 + static_cast<int>(data_rng.uniform_int(3));
        Embedder e(tiny_config(d_in, d_feat, n_classes), 1000 + trial);

        std::vector<std::vector<double>> xs;
        std::vector<int> labels;
        const int batch_n = 1 + static_cast<int>(data_rng.uniform_int(3));
        for (int b = 0; b < batch_n; ++b) {
            std::vector<double> x(d_in);
            data_rng.fill_normal(x);
            xs.push_back(x);
            labels.push_back(static_cast<int>(data_rng.uniform_int(n_classes)));
        }
        const auto batch = make_batch(xs, labels);

        EmbedderGradients grads;
        const double loss = e.compute_gradients(batch, grads);
        CHECK(loss == doctest::Approx(batch_loss(e, batch)).epsilon(1e-12));

        const double h = 1e-5;
        auto check_param = [&](double& p, double analytic) {
            const double saved = p;
            p = saved + h;
            const double up = batch_loss(e, batch);
            p = saved - h;
            const double down = batch_loss(e, batch);
            p = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
            CHECK(std::abs(analytic - numeric) / scale < 1e-4);
        };

        for (int i = 0; i < d_feat; ++i) {
            for (int j = 0; j < d_in; ++j) check_param(e.w1().at(i, j), grads.w1.at(i, j));
            check_param(e.b1()[i], grads.b1[i]);
        }
        for (int c = 0; c < n_classes; ++c) {
            for (int j = 0; j < d_feat; ++j) check_param(e.w2().at(c, j), grads.w2.at(c, j));
            check_param(e.b2()[c], grads.b2[c]);
        }
    }
}

TEST_CASE("gradients respect weight decay on weights only") {
    auto cfg = tiny_config();
    cfg.weight_decay = 0.1;
    Embedder with(cfg, 3);
    cfg.weight_decay = 0.0;
    Embedder without(cfg, 3);
    CHECK(with.w1() == without.w1());  // same init, decay acts in the step

    const std::vector<std::vector<double>> xs = {{0.5, -0.3, 1.0}};
    const auto batch = make_batch(xs, {1});
    with.backward_step(batch);
    without.backward_step(batch);
    // Decay shrinks weights toward zero relative to the decay-free step.
    double with_norm = 0.0, without_norm = 0.0;
    for (double v : with.w1().data()) with_norm += v * v;
    for (double v : without.w1().data()) without_norm += v * v;
    CHECK(with_norm < without_norm);
}

TEST_CASE("backward_step returns the pre-update loss and learns") {
    Embedder e(tiny_config(), 7);
    const std::vector<std::vector<double>> xs = {
        {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    const auto batch = make_batch(xs, {0, 1, 2});

    const double before = batch_loss(e, batch);
    const double reported = e.backward_step(batch);
    CHECK(reported == doctest::Approx(before).epsilon(1e-12));

    double loss = reported;
    for (int step = 0; step < 49; ++step) loss = e.backward_step(batch);
    CHECK(batch_loss(e, batch) < before);
    CHECK(loss < before);
}

TEST_CASE("backward_step rejects bad batches") {
    Embedder e(tiny_config(), 7);
    CHECK_THROWS_AS(e.backward_step({}), InputError);
    const std::vector<std::vector<double>> xs = {{1.0, 0.0, 0.0}};
    CHECK_THROWS_AS(e.backward_step(make_batch(xs, {3})), InputError);
    CHECK_THROWS_AS(e.backward_step(make_batch(xs, {-1})), InputError);
}

TEST_CASE("dropout draws reproducibly from the provided stream") {
    auto cfg = tiny_config();
    cfg.dropout = 0.5;
    const Embedder e(cfg, 21);
    const std::vector<std::vector<double>> xs = {{0.4, 1.0, -0.2}, {-1.0, 0.3, 0.8}};
    const auto batch = make_batch(xs, {0, 2});

    EmbedderGradients a, b;
    Rng ra(5), rb(5), rc(6);
    const double la = e.compute_gradients(batch, a, &ra);
    const double lb = e.compute_gradients(batch, b, &rb);
    CHECK(la == lb);
    CHECK(a.w1 == b.w1);
    CHECK(a.w2 == b.w2);

    EmbedderGradients c;
    e.compute_gradients(batch, c, &rc);
    CHECK(a.w2 != c.w2);  // a different mask moves the head gradient
}

TEST_CASE("eval forward ignores the dropout setting") {
    auto cfg = tiny_config();
    const Embedder plain(cfg, 33);
    cfg.dropout = 0.9;
    const Embedder dropped(cfg, 33);
    const std::vector<double> x = {0.2, -0.4, 0.6};
    CHECK(plain.forward(x).logits == dropped.forward(x).logits);
}

TEST_CASE("checkpoints round-trip bytes and training resumes identically") {
    const auto dir = std::filesystem::temp_directory_path() / "odct_emb_test";
    std::filesystem::create_directories(dir);

    auto cfg = tiny_config();
    cfg.dropout = 0.3;  // exercises the internal stream through save/load
    Embedder live(cfg, 77);
    const std::vector<std::vector<double>> xs = {
        {1.0, 0.2, 0.0}, {0.0, 1.0, -0.5}, {0.3, 0.0, 1.0}};
    const auto batch = make_batch(xs, {0, 1, 2});
    for (int i = 0; i < 3; ++i) live.backward_step(batch);

    const auto p1 = dir / "a.bin";
    const auto p2 = dir / "b.bin";
    live.save(p1);

    auto restored = Embedder::load(p1);
    restored.save(p2);
    CHECK(file_bytes(p1) == file_bytes(p2));

    const std::vector<double> probe = {0.5, 0.5, 0.5};
    CHECK(restored.forward(probe).logits == live.forward(probe).logits);

    // Continuing from the checkpoint replays the original trajectory.
    for (int i = 0; i < 2; ++i) {
        live.backward_step(batch);
        restored.backward_step(batch);
    }
    CHECK(restored.forward(probe).logits == live.forward(probe).logits);
    CHECK(restored.w1() == live.w1());
    CHECK(restored.w2() == live.w2());

    CHECK_THROWS_AS(Embedder::load(dir / "missing.bin"), InputError);
    std::filesystem::remove_all(dir);
}
