#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "odct/config.hpp"
#include "odct/error.hpp"
#include "odct/io.hpp"
#include "odct/metrics.hpp"
#include "odct/rng.hpp"
#include "odct/synth.hpp"
#include "odct/trackgen.hpp"
#include "odct/trainer.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace odct;

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

/// Every subcommand records one of these before it writes any result.
void write_manifest(const fs::path& out_dir, const std::string& command, const RunConfig& cfg,
                    std::optional<std::uint64_t> seed,
                    const std::vector<std::pair<std::string, fs::path>>& inputs,
                    const std::vector<std::string>& outputs) {
    fs::create_directories(out_dir);
    json inputs_json = json::array();
    for (const auto& [name, path] : inputs) {
        inputs_json.push_back(
            {{"name", name}, {"path", path.string()}, {"digest", file_digest(path)}});
    }
    json m{{"command", command},
           {"variant", std::string(variant_name(cfg.train.variant))},
           {"config_digest", config_digest(cfg)},
           {"config", json::parse(config_dump(cfg))},
           {"inputs", std::move(inputs_json)},
           {"outputs", outputs},
           {"created_utc", utc_timestamp()}};
    if (seed) {
        m["seed"] = *seed;
    } else {
        m["seed"] = nullptr;
    }
    const fs::path path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << m.dump(2) << '\n';
    if (!out.flush()) throw InputError("write failed: " + path.string());
}

RunConfig resolve_config(const std::string& config_path) {
    return config_path.empty() ? default_config() : load_config(config_path);
}

struct SynthOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool scene = false;
    int frames = 60;
    int objects = 4;
    int distractors = 30;
};

void cmd_synth(const SynthOpts& opt) {
    RunConfig cfg = resolve_config(opt.config_path);
    if (opt.seed) cfg.synth.seed = *opt.seed;
    const fs::path out_dir(opt.out_dir);
    std::vector<std::pair<std::string, fs::path>> inputs;
    if (!opt.config_path.empty()) inputs.emplace_back("config", opt.config_path);

    if (opt.scene) {
        if (opt.frames < 1) throw InputError("--frames must be positive");
        if (opt.objects < 0 || opt.distractors < 0) {
            throw InputError("--objects and --distractors must be non-negative");
        }
        PlantedScene scene;
        scene.n_frames = opt.frames;
        scene.distractors_per_frame = opt.distractors;
        scene.objectness_noise = 0.05;
        scene.seed = cfg.synth.seed;
        Rng layout(Rng::mix(cfg.synth.seed ^ 0x5CE4E5D1ull));
        for (int i = 0; i < opt.objects; ++i) {
            PlantedObject obj;
            obj.w = 120.0 + layout.uniform() * 100.0;
            obj.h = 120.0 + layout.uniform() * 100.0;
            obj.x = 100.0 + layout.uniform() * 1400.0;
            obj.y = 80.0 + layout.uniform() * 700.0;
            obj.vx = (layout.uniform() - 0.5) * 8.0;
            obj.vy = (layout.uniform() - 0.5) * 6.0;
            scene.objects.push_back(obj);
        }
        write_manifest(out_dir, "synth", cfg, cfg.synth.seed, inputs,
                       {"proposals.jsonl", "flows.jsonl"});
        const ProposalStream stream = gen_proposal_stream(scene);
        save_proposal_stream(0, stream, out_dir / "proposals.jsonl");
        save_flows(0, stream.flows, out_dir / "flows.jsonl");
        std::size_t n_boxes = 0;
        for (const auto& f : stream.frames) n_boxes += f.size();
        std::cout << "scene: " << opt.frames << " frames, " << opt.objects
                  << " planted objects, " << n_boxes << " proposals -> "
                  << (out_dir / "proposals.jsonl").string() << "\n";
        return;
    }

    write_manifest(out_dir, "synth", cfg, cfg.synth.seed, inputs,
                   {"dataset.jsonl", "classes.jsonl"});
    const TrackedDataset dataset = gen_tracked_features(cfg.synth);
    save_dataset(dataset, out_dir / "dataset.jsonl");
    save_class_labels(dataset.class_labels, out_dir / "classes.jsonl");
    std::cout << "dataset: " << dataset.size() << " samples ("
              << cfg.synth.n_classes << " classes x " << cfg.synth.tracks_per_class
              << " tracks x " << cfg.synth.samples_per_track << "), d_in=" << dataset.d_in
              << " -> " << (out_dir / "dataset.jsonl").string() << "\n";
}

struct TrackgenOpts {
    std::string proposals_path;
    std::string flows_path;
    std::string config_path;
    std::string out_dir = "out";
};

void cmd_trackgen(const TrackgenOpts& opt) {
    RunConfig cfg = resolve_config(opt.config_path);
    const TrackerConfig& tc = cfg.trackgen;
    const fs::path out_dir(opt.out_dir);

    std::vector<Snippet> snippets = load_proposals(opt.proposals_path);
    if (!opt.flows_path.empty()) {
        auto flows = load_flows(opt.flows_path);
        for (auto& [snippet_id, list] : flows) {
            bool found = false;
            for (Snippet& s : snippets) {
                if (s.snippet_id == snippet_id) {
                    s.flows = std::move(list);
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw InputError(opt.flows_path + ": flow for unknown snippet " +
                                 std::to_string(snippet_id));
            }
        }
    }

    std::vector<std::pair<std::string, fs::path>> inputs{{"proposals", opt.proposals_path}};
    if (!opt.flows_path.empty()) inputs.emplace_back("flows", opt.flows_path);
    if (!opt.config_path.empty()) inputs.emplace_back("config", opt.config_path);
    write_manifest(out_dir, "trackgen", cfg, std::nullopt, inputs,
                   {"tracks.jsonl", "samples.jsonl", "summary.json"});

    std::vector<SnippetTrack> emitted;
    TrackedDataset samples;
    std::map<int, int> length_histogram;
    double score_sum = 0.0;
    std::int64_t next_track_id = 0;
    for (Snippet& snippet : snippets) {
        std::vector<Track> tracks =
            filter_tracks(associate(prepare_frames(std::move(snippet.frames), tc),
                                    snippet.flows, tc),
                          tc);
        for (Track& t : tracks) {
            t.id = next_track_id++;
            ++length_histogram[t.length()];
            score_sum += t.score;
            for (const BoundingBox& b : subsample_track(t, tc.samples_per_track)) {
                TrainSample s;
                s.id = static_cast<std::int64_t>(samples.samples.size());
                s.track_id = t.id;
                // Box geometry as the crop stand-in, kilopixel units.
                s.input = {(b.x + b.w / 2.0) / 1000.0, (b.y + b.h / 2.0) / 1000.0,
                           b.w / 1000.0, b.h / 1000.0, b.objectness};
                samples.samples.push_back(std::move(s));
            }
            emitted.push_back({snippet.snippet_id, std::move(t)});
        }
    }
    samples.d_in = 5;

    save_tracks(emitted, out_dir / "tracks.jsonl");
    save_dataset(samples, out_dir / "samples.jsonl");

    json histogram = json::object();
    for (const auto& [len, count] : length_histogram) {
        histogram[std::to_string(len)] = count;
    }
    const json summary{{"n_snippets", snippets.size()},
                       {"n_tracks", emitted.size()},
                       {"n_samples", samples.samples.size()},
                       {"mean_score", emitted.empty() ? 0.0 : score_sum / emitted.size()},
                       {"length_histogram", histogram}};
    {
        const fs::path path = out_dir / "summary.json";
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw InputError("cannot open for writing: " + path.string());
        out << summary.dump(2) << '\n';
        if (!out.flush()) throw InputError("write failed: " + path.string());
    }
    std::cout << "tracks: " << emitted.size() << " across " << snippets.size()
              << " snippet(s), " << samples.samples.size() << " samples -> "
              << (out_dir / "tracks.jsonl").string() << "\n";
}

struct TrainOpts {
    std::string dataset_path;
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string variant;
    std::optional<int> epochs;
};

void cmd_train(const TrainOpts& opt) {
    RunConfig cfg = resolve_config(opt.config_path);
    if (opt.seed) cfg.train.seed = *opt.seed;
    if (!opt.variant.empty()) cfg.train.variant = parse_variant(opt.variant);
    if (opt.epochs) {
        if (*opt.epochs < 0) throw InputError("--epochs must be non-negative");
        cfg.train.epochs = *opt.epochs;
    }
    const fs::path out_dir(opt.out_dir);

    const TrackedDataset dataset = load_dataset(opt.dataset_path);

    std::vector<std::pair<std::string, fs::path>> inputs{{"dataset", opt.dataset_path}};
    if (!opt.config_path.empty()) inputs.emplace_back("config", opt.config_path);
    write_manifest(out_dir, "train", cfg, cfg.train.seed, inputs,
                   {"trace.csv", "iters.csv", "memory.bin", "embedder.bin",
                    "change_ratio.svg", "mean_track_entropy.svg"});

    const TrainResult result = run_training(dataset, cfg.train, out_dir);

    plot::Series change, entropy;
    for (const EpochTrace& t : result.epochs) {
        change.x.push_back(t.epoch);
        change.y.push_back(t.change_ratio);
        entropy.x.push_back(t.epoch);
        entropy.y.push_back(t.mean_track_entropy);
    }
    write_line_svg(out_dir / "change_ratio.svg", "Pseudo-label change ratio per epoch",
                   "epoch", "change ratio", change);
    write_line_svg(out_dir / "mean_track_entropy.svg", "Mean intra-track entropy per epoch",
                   "epoch", "entropy (nats)", entropy,
                   std::log(static_cast<double>(cfg.train.n_clusters)), "ln C");

    std::cout << "variant=" << variant_name(cfg.train.variant) << " seed=" << cfg.train.seed
              << " samples=" << dataset.size() << " clusters=" << cfg.train.n_clusters << "\n";
    for (const EpochTrace& t : result.epochs) {
        std::cout << "epoch " << t.epoch << ": loss=" << t.loss
                  << " change_ratio=" << t.change_ratio
                  << " track_entropy=" << t.mean_track_entropy << " sizes=["
                  << t.min_cluster_size << ", " << t.max_cluster_size << "]\n";
    }
    std::cout << "wrote " << (out_dir / "trace.csv").string() << "\n";
}

struct EvalOpts {
    std::string memory_path;
    std::string dataset_path;
    std::string classes_path;
    std::string out_dir = "out";
};

void cmd_eval(const EvalOpts& opt) {
    const MemorySnapshot snap = load_memory_snapshot(opt.memory_path);
    const TrackedDataset dataset = load_dataset(opt.dataset_path);
    if (snap.samples.size() != dataset.size()) {
        throw InputError("checkpoint holds " + std::to_string(snap.samples.size()) +
                         " samples but the dataset has " + std::to_string(dataset.size()));
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (snap.track_of[i] != dataset.samples[i].track_id) {
            throw InputError("sample " + std::to_string(i) + ": checkpoint track id " +
                             std::to_string(snap.track_of[i]) + " != dataset track id " +
                             std::to_string(dataset.samples[i].track_id));
        }
    }
    const int n_clusters = snap.centroids.count();

    std::vector<int> class_labels;
    if (!opt.classes_path.empty()) {
        class_labels = load_class_labels(opt.classes_path, dataset.size());
    }

    const fs::path out_dir(opt.out_dir);
    RunConfig cfg = default_config();  // recorded for traceability only
    std::vector<std::pair<std::string, fs::path>> inputs{{"memory", opt.memory_path},
                                                         {"dataset", opt.dataset_path}};
    if (!opt.classes_path.empty()) inputs.emplace_back("classes", opt.classes_path);
    write_manifest(out_dir, "eval", cfg, std::nullopt, inputs, {"eval.json"});

    const double track_h =
        mean_track_entropy(snap.samples.pseudo_labels, snap.track_of, n_clusters);
    std::vector<int> sizes(static_cast<std::size_t>(n_clusters), 0);
    for (int label : snap.samples.pseudo_labels) ++sizes[static_cast<std::size_t>(label)];
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    const int empty_clusters =
        static_cast<int>(std::count(sizes.begin(), sizes.end(), 0));

    json eval{{"n_samples", dataset.size()},
              {"n_clusters", n_clusters},
              {"mean_track_entropy", track_h},
              {"entropy_upper_bound", std::log(static_cast<double>(n_clusters))},
              {"cluster_sizes", sizes},
              {"min_cluster_size", *lo},
              {"max_cluster_size", *hi},
              {"empty_clusters", empty_clusters}};

    std::cout << "samples=" << dataset.size() << " clusters=" << n_clusters << "\n";
    std::cout << "mean intra-track entropy: " << track_h << " (upper bound ln C = "
              << std::log(static_cast<double>(n_clusters)) << ")\n";
    if (!class_labels.empty()) {
        const double class_h =
            intra_class_entropy(snap.samples.pseudo_labels, class_labels, n_clusters);
        eval["intra_class_entropy"] = class_h;
        std::cout << "mean intra-class entropy: " << class_h << "\n";
    }
    std::cout << "cluster sizes: min=" << *lo << " max=" << *hi
              << " empty=" << empty_clusters << "\n";

    const fs::path path = out_dir / "eval.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << eval.dump(2) << '\n';
    if (!out.flush()) throw InputError("write failed: " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online clustering with track-consistent pseudo-labels"};
    app.require_subcommand(1);

    SynthOpts synth_opts;
    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic datasets or scenes");
    synth->add_option("--config", synth_opts.config_path, "JSON config file");
    synth->add_option("--seed", synth_opts.seed, "Override the generator seed");
    synth->add_option("--out", synth_opts.out_dir, "Output directory")->capture_default_str();
    synth->add_flag("--scene", synth_opts.scene,
                    "Emit a planted proposal stream instead of a feature dataset");
    synth->add_option("--frames", synth_opts.frames, "Scene length in frames")
        ->capture_default_str();
    synth->add_option("--objects", synth_opts.objects, "Planted objects in the scene")
        ->capture_default_str();
    synth->add_option("--distractors", synth_opts.distractors,
                      "Distractor proposals per frame")
        ->capture_default_str();
    synth->callback([&] { cmd_synth(synth_opts); });

    TrackgenOpts trackgen_opts;
    CLI::App* trackgen =
        app.add_subcommand("trackgen", "Associate box proposals into tracks");
    trackgen->add_option("--proposals", trackgen_opts.proposals_path, "Proposal JSONL file")
        ->required();
    trackgen->add_option("--flows", trackgen_opts.flows_path, "Flow offset JSONL file");
    trackgen->add_option("--config", trackgen_opts.config_path, "JSON config file");
    trackgen->add_option("--out", trackgen_opts.out_dir, "Output directory")
        ->capture_default_str();
    trackgen->callback([&] { cmd_trackgen(trackgen_opts); });

    TrainOpts train_opts;
    CLI::App* train = app.add_subcommand("train", "Run online clustering training");
    train->add_option("--dataset", train_opts.dataset_path, "Dataset JSONL file")->required();
    train->add_option("--config", train_opts.config_path, "JSON config file");
    train->add_option("--seed", train_opts.seed, "Override the training seed");
    train->add_option("--variant", train_opts.variant, "odc | odc_track_init | odct");
    train->add_option("--epochs", train_opts.epochs, "Override the epoch count");
    train->add_option("--out", train_opts.out_dir, "Output directory")->capture_default_str();
    train->callback([&] { cmd_train(train_opts); });

    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved memory checkpoint");
    eval->add_option("--memory", eval_opts.memory_path, "memory.bin checkpoint")->required();
    eval->add_option("--dataset", eval_opts.dataset_path, "Dataset JSONL file")->required();
    eval->add_option("--classes", eval_opts.classes_path, "Class label sidecar JSONL");
    eval->add_option("--out", eval_opts.out_dir, "Output directory")->capture_default_str();
    eval->callback([&] { cmd_eval(eval_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
