#include "odct/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <vector>

#include <json.hpp>

#include "odct/error.hpp"

namespace odct {

namespace {

using nlohmann::json;

/// Collects section-qualified problems so one load reports them all.
struct Errors {
    std::vector<std::string> items;

    void add(const std::string& where, const std::string& what) {
        items.push_back(where + ": " + what);
    }
    [[noreturn]] void raise(const std::filesystem::path& path) const {
        std::string msg = path.string() + ": invalid config";
        for (const std::string& e : items) msg += "\n  " + e;
        throw InputError(msg);
    }
};

void check_section_keys(const json& obj, const std::string& where,
                        std::initializer_list<const char*> known, Errors& errs) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) errs.add(where, "unknown key \"" + key + "\"");
    }
}

template <class T>
void read_int(const json& obj, const std::string& where, const char* key, T& out,
              Errors& errs) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        errs.add(where, "\"" + std::string(key) + "\" must be an integer");
        return;
    }
    out = v.get<T>();
}

void read_u64(const json& obj, const std::string& where, const char* key, std::uint64_t& out,
              Errors& errs) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!(v.is_number_integer() && (v.is_number_unsigned() || v.get<std::int64_t>() >= 0))) {
        errs.add(where, "\"" + std::string(key) + "\" must be a non-negative integer");
        return;
    }
    out = v.get<std::uint64_t>();
}

void read_num(const json& obj, const std::string& where, const char* key, double& out,
              Errors& errs) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        errs.add(where, "\"" + std::string(key) + "\" must be a number");
        return;
    }
    out = v.get<double>();
}

void load_synth(const json& obj, SynthSpec& s, Errors& errs) {
    const std::string where = "synth";
    check_section_keys(obj, where,
                       {"n_classes", "tracks_per_class", "samples_per_track", "d_in",
                        "intra_track_drift", "class_separation", "noise_sigma", "seed"},
                       errs);
    read_int(obj, where, "n_classes", s.n_classes, errs);
    read_int(obj, where, "tracks_per_class", s.tracks_per_class, errs);
    read_int(obj, where, "samples_per_track", s.samples_per_track, errs);
    read_int(obj, where, "d_in", s.d_in, errs);
    read_num(obj, where, "intra_track_drift", s.intra_track_drift, errs);
    read_num(obj, where, "class_separation", s.class_separation, errs);
    read_num(obj, where, "noise_sigma", s.noise_sigma, errs);
    read_u64(obj, where, "seed", s.seed, errs);
    if (s.n_classes < 1) errs.add(where, "n_classes must be positive");
    if (s.tracks_per_class < 1) errs.add(where, "tracks_per_class must be positive");
    if (s.samples_per_track < 1) errs.add(where, "samples_per_track must be positive");
    if (s.d_in < 1) errs.add(where, "d_in must be positive");
    if (s.intra_track_drift < 0.0) errs.add(where, "intra_track_drift must be non-negative");
    if (s.class_separation < 0.0) errs.add(where, "class_separation must be non-negative");
    if (s.noise_sigma < 0.0) errs.add(where, "noise_sigma must be non-negative");
}

void load_trackgen(const json& obj, TrackerConfig& t, Errors& errs) {
    const std::string where = "trackgen";
    check_section_keys(obj, where,
                       {"iou_threshold", "ttl", "min_box_area", "min_len", "max_len",
                        "top_k_tracks", "samples_per_track", "max_proposals_per_frame",
                        "nms_overlap"},
                       errs);
    read_num(obj, where, "iou_threshold", t.iou_threshold, errs);
    read_int(obj, where, "ttl", t.ttl, errs);
    read_num(obj, where, "min_box_area", t.min_box_area, errs);
    read_int(obj, where, "min_len", t.min_len, errs);
    read_int(obj, where, "max_len", t.max_len, errs);
    read_int(obj, where, "top_k_tracks", t.top_k_tracks, errs);
    read_int(obj, where, "samples_per_track", t.samples_per_track, errs);
    read_int(obj, where, "max_proposals_per_frame", t.max_proposals_per_frame, errs);
    read_num(obj, where, "nms_overlap", t.nms_overlap, errs);
    if (t.iou_threshold < 0.0 || t.iou_threshold >= 1.0) {
        errs.add(where, "iou_threshold must lie in [0, 1)");
    }
    if (t.ttl < 0) errs.add(where, "ttl must be non-negative");
    if (t.min_box_area < 0.0) errs.add(where, "min_box_area must be non-negative");
    if (t.min_len < 1) errs.add(where, "min_len must be positive");
    if (t.max_len < t.min_len) errs.add(where, "max_len must be >= min_len");
    if (t.top_k_tracks < 1) errs.add(where, "top_k_tracks must be positive");
    if (t.samples_per_track < 1) errs.add(where, "samples_per_track must be positive");
    if (t.max_proposals_per_frame < 1) {
        errs.add(where, "max_proposals_per_frame must be positive");
    }
    if (t.nms_overlap < 0.0 || t.nms_overlap > 1.0) {
        errs.add(where, "nms_overlap must lie in [0, 1]");
    }
}

void load_embedder(const json& obj, EmbedderConfig& e, Errors& errs) {
    const std::string where = "train.embedder";
    check_section_keys(obj, where,
                       {"d_in", "d_feat", "n_classes", "learning_rate", "sgd_momentum",
                        "weight_decay", "dropout"},
                       errs);
    read_int(obj, where, "d_in", e.d_in, errs);
    read_int(obj, where, "d_feat", e.d_feat, errs);
    read_int(obj, where, "n_classes", e.n_classes, errs);
    read_num(obj, where, "learning_rate", e.learning_rate, errs);
    read_num(obj, where, "sgd_momentum", e.sgd_momentum, errs);
    read_num(obj, where, "weight_decay", e.weight_decay, errs);
    read_num(obj, where, "dropout", e.dropout, errs);
    if (e.d_in < 1) errs.add(where, "d_in must be positive");
    if (e.d_feat < 1) errs.add(where, "d_feat must be positive");
    if (e.n_classes < 1) errs.add(where, "n_classes must be positive");
    if (!(e.learning_rate > 0.0)) errs.add(where, "learning_rate must be positive");
    if (e.sgd_momentum < 0.0 || e.sgd_momentum >= 1.0) {
        errs.add(where, "sgd_momentum must lie in [0, 1)");
    }
    if (e.weight_decay < 0.0) errs.add(where, "weight_decay must be non-negative");
    if (e.dropout < 0.0 || e.dropout >= 1.0) errs.add(where, "dropout must lie in [0, 1)");
}

void load_train(const json& obj, TrainConfig& t, Errors& errs) {
    const std::string where = "train";
    check_section_keys(obj, where,
                       {"variant", "n_clusters", "batch_size", "epochs", "memory_momentum",
                        "centroid_update_interval", "small_cluster_threshold", "seed",
                        "embedder"},
                       errs);
    if (obj.contains("variant")) {
        const json& v = obj.at("variant");
        if (!v.is_string()) {
            errs.add(where, "\"variant\" must be a string");
        } else {
            try {
                t.variant = parse_variant(v.get<std::string>());
            } catch (const InputError& e) {
                errs.add(where, e.what());
            }
        }
    }
    read_int(obj, where, "n_clusters", t.n_clusters, errs);
    read_int(obj, where, "batch_size", t.batch_size, errs);
    read_int(obj, where, "epochs", t.epochs, errs);
    read_num(obj, where, "memory_momentum", t.memory_momentum, errs);
    read_int(obj, where, "centroid_update_interval", t.centroid_update_interval, errs);
    read_int(obj, where, "small_cluster_threshold", t.small_cluster_threshold, errs);
    read_u64(obj, where, "seed", t.seed, errs);
    if (obj.contains("embedder")) {
        const json& e = obj.at("embedder");
        if (!e.is_object()) {
            errs.add(where, "\"embedder\" must be an object");
        } else {
            load_embedder(e, t.embedder, errs);
        }
    }
    if (t.n_clusters < 1) errs.add(where, "n_clusters must be positive");
    if (t.batch_size < 1) errs.add(where, "batch_size must be positive");
    if (t.epochs < 0) errs.add(where, "epochs must be non-negative");
    if (!(t.memory_momentum > 0.0) || t.memory_momentum > 1.0) {
        errs.add(where, "memory_momentum must lie in (0, 1]");
    }
    if (t.centroid_update_interval < 1) {
        errs.add(where, "centroid_update_interval must be positive");
    }
    if (t.small_cluster_threshold < 0) {
        errs.add(where, "small_cluster_threshold must be non-negative");
    }
    if (t.embedder.n_classes != t.n_clusters) {
        errs.add(where, "embedder.n_classes must equal n_clusters");
    }
}

json to_json(const RunConfig& cfg) {
    return json{
        {"synth",
         {{"n_classes", cfg.synth.n_classes},
          {"tracks_per_class", cfg.synth.tracks_per_class},
          {"samples_per_track", cfg.synth.samples_per_track},
          {"d_in", cfg.synth.d_in},
          {"intra_track_drift", cfg.synth.intra_track_drift},
          {"class_separation", cfg.synth.class_separation},
          {"noise_sigma", cfg.synth.noise_sigma},
          {"seed", cfg.synth.seed}}},
        {"trackgen",
         {{"iou_threshold", cfg.trackgen.iou_threshold},
          {"ttl", cfg.trackgen.ttl},
          {"min_box_area", cfg.trackgen.min_box_area},
          {"min_len", cfg.trackgen.min_len},
          {"max_len", cfg.trackgen.max_len},
          {"top_k_tracks", cfg.trackgen.top_k_tracks},
          {"samples_per_track", cfg.trackgen.samples_per_track},
          {"max_proposals_per_frame", cfg.trackgen.max_proposals_per_frame},
          {"nms_overlap", cfg.trackgen.nms_overlap}}},
        {"train",
         {{"variant", std::string(variant_name(cfg.train.variant))},
          {"n_clusters", cfg.train.n_clusters},
          {"batch_size", cfg.train.batch_size},
          {"epochs", cfg.train.epochs},
          {"memory_momentum", cfg.train.memory_momentum},
          {"centroid_update_interval", cfg.train.centroid_update_interval},
          {"small_cluster_threshold", cfg.train.small_cluster_threshold},
          {"seed", cfg.train.seed},
          {"embedder",
           {{"d_in", cfg.train.embedder.d_in},
            {"d_feat", cfg.train.embedder.d_feat},
            {"n_classes", cfg.train.embedder.n_classes},
            {"learning_rate", cfg.train.embedder.learning_rate},
            {"sgd_momentum", cfg.train.embedder.sgd_momentum},
            {"weight_decay", cfg.train.embedder.weight_decay},
            {"dropout", cfg.train.embedder.dropout}}}}}};
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open for reading: " + path.string());
    json root = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (root.is_discarded()) throw InputError(path.string() + ": invalid JSON");
    if (!root.is_object()) throw InputError(path.string() + ": config must be a JSON object");

    Errors errs;
    check_section_keys(root, "config", {"synth", "trackgen", "train"}, errs);
    RunConfig cfg;
    const auto section = [&](const char* name) -> const json* {
        if (!root.contains(name)) return nullptr;
        const json& s = root.at(name);
        if (!s.is_object()) {
            errs.add("config", "\"" + std::string(name) + "\" must be an object");
            return nullptr;
        }
        return &s;
    };
    if (const json* s = section("synth")) load_synth(*s, cfg.synth, errs);
    if (const json* s = section("trackgen")) load_trackgen(*s, cfg.trackgen, errs);
    if (const json* s = section("train")) load_train(*s, cfg.train, errs);
    if (!errs.items.empty()) errs.raise(path);
    return cfg;
}

std::string config_dump(const RunConfig& cfg, int indent) { return to_json(cfg).dump(indent); }

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << config_dump(cfg, 2) << '\n';
    if (!out.flush()) throw InputError("write failed: " + path.string());
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_digest(const RunConfig& cfg) { return fnv1a_hex(config_dump(cfg)); }

}  // namespace odct
