#include "odct/io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>

#include <json.hpp>

#include "odct/error.hpp"

namespace odct {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& msg) {
    throw InputError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

struct LineCtx {
    const std::filesystem::path& path;
    std::size_t line;
};

json parse_line(const std::string& text, const LineCtx& ctx) {
    json obj = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) fail(ctx.path, ctx.line, "invalid JSON");
    if (!obj.is_object()) fail(ctx.path, ctx.line, "expected a JSON object");
    return obj;
}

void check_keys(const json& obj, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional, const LineCtx& ctx) {
    for (const char* key : required) {
        if (!obj.contains(key)) {
            fail(ctx.path, ctx.line, "missing key \"" + std::string(key) + "\"");
        }
    }
    for (const auto& [key, value] : obj.items()) {
        const auto known = [&](std::initializer_list<const char*> keys) {
            return std::any_of(keys.begin(), keys.end(),
                               [&](const char* k) { return key == k; });
        };
        if (!known(required) && !known(optional)) {
            fail(ctx.path, ctx.line, "unknown key \"" + key + "\"");
        }
    }
}

double num_field(const json& obj, const char* key, const LineCtx& ctx) {
    const json& v = obj.at(key);
    if (!v.is_number()) fail(ctx.path, ctx.line, "\"" + std::string(key) + "\" must be a number");
    return v.get<double>();
}

std::int64_t int_field(const json& obj, const char* key, const LineCtx& ctx) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        fail(ctx.path, ctx.line, "\"" + std::string(key) + "\" must be an integer");
    }
    return v.get<std::int64_t>();
}

int frame_field(const json& obj, const LineCtx& ctx) {
    const std::int64_t f = int_field(obj, "frame_index", ctx);
    if (f < 0 || f > 1'000'000'000) fail(ctx.path, ctx.line, "frame_index out of range");
    return static_cast<int>(f);
}

BoundingBox box_from(const json& obj, const LineCtx& ctx) {
    BoundingBox b;
    b.frame_index = frame_field(obj, ctx);
    b.x = num_field(obj, "x", ctx);
    b.y = num_field(obj, "y", ctx);
    b.w = num_field(obj, "w", ctx);
    b.h = num_field(obj, "h", ctx);
    b.objectness = num_field(obj, "objectness", ctx);
    if (!valid_box(b)) {
        fail(ctx.path, ctx.line,
             "invalid box (needs positive extent and objectness in [0, 1])");
    }
    return b;
}

json box_to_json(const BoundingBox& b) {
    return json{{"frame_index", b.frame_index}, {"x", b.x},         {"y", b.y},
                {"w", b.w},                     {"h", b.h},         {"objectness", b.objectness}};
}

/// Runs fn(line_text, ctx) over every non-empty line of the file.
template <class Fn>
void for_each_line(const std::filesystem::path& path, Fn fn) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open for reading: " + path.string());
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.empty()) continue;
        fn(text, LineCtx{path, line});
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    return out;
}

void finish_out(std::ofstream& out, const std::filesystem::path& path) {
    if (!out.flush()) throw InputError("write failed: " + path.string());
}

}  // namespace

std::vector<Snippet> load_proposals(const std::filesystem::path& path) {
    // snippet -> frame_index -> boxes, in file order within a frame
    std::map<std::int64_t, std::map<int, std::vector<BoundingBox>>> grouped;
    for_each_line(path, [&](const std::string& text, const LineCtx& ctx) {
        const json obj = parse_line(text, ctx);
        check_keys(obj, {"snippet_id", "frame_index", "x", "y", "w", "h", "objectness"},
                   {"gt_track_id"}, ctx);
        const std::int64_t snippet = int_field(obj, "snippet_id", ctx);
        BoundingBox b = box_from(obj, ctx);
        grouped[snippet][b.frame_index].push_back(b);
    });

    std::vector<Snippet> snippets;
    snippets.reserve(grouped.size());
    for (auto& [snippet_id, by_frame] : grouped) {
        Snippet s;
        s.snippet_id = snippet_id;
        const int lo = by_frame.begin()->first;
        const int hi = by_frame.rbegin()->first;
        s.frames.resize(static_cast<std::size_t>(hi - lo + 1));
        for (auto& [frame, boxes] : by_frame) {
            s.frames[static_cast<std::size_t>(frame - lo)] = std::move(boxes);
        }
        snippets.push_back(std::move(s));
    }
    return snippets;
}

std::map<std::int64_t, std::vector<FlowOffset>> load_flows(const std::filesystem::path& path) {
    std::map<std::int64_t, std::vector<FlowOffset>> flows;
    for_each_line(path, [&](const std::string& text, const LineCtx& ctx) {
        const json obj = parse_line(text, ctx);
        check_keys(obj, {"snippet_id", "frame_index", "dx", "dy"}, {}, ctx);
        FlowOffset f;
        f.frame_index = frame_field(obj, ctx);
        f.dx = num_field(obj, "dx", ctx);
        f.dy = num_field(obj, "dy", ctx);
        flows[int_field(obj, "snippet_id", ctx)].push_back(f);
    });
    for (auto& [snippet, list] : flows) {
        std::stable_sort(list.begin(), list.end(),
                         [](const FlowOffset& a, const FlowOffset& b) {
                             return a.frame_index < b.frame_index;
                         });
    }
    return flows;
}

std::vector<SnippetTrack> load_tracks(const std::filesystem::path& path) {
    std::vector<SnippetTrack> tracks;
    for_each_line(path, [&](const std::string& text, const LineCtx& ctx) {
        const json obj = parse_line(text, ctx);
        check_keys(obj, {"track_id", "snippet_id", "score", "boxes"}, {}, ctx);
        SnippetTrack st;
        st.snippet_id = int_field(obj, "snippet_id", ctx);
        st.track.id = int_field(obj, "track_id", ctx);
        st.track.score = num_field(obj, "score", ctx);
        const json& boxes = obj.at("boxes");
        if (!boxes.is_array() || boxes.empty()) {
            fail(ctx.path, ctx.line, "\"boxes\" must be a non-empty array");
        }
        for (const json& bj : boxes) {
            if (!bj.is_object()) fail(ctx.path, ctx.line, "box entries must be objects");
            check_keys(bj, {"frame_index", "x", "y", "w", "h", "objectness"}, {}, ctx);
            st.track.boxes.push_back(box_from(bj, ctx));
        }
        tracks.push_back(std::move(st));
    });
    return tracks;
}

TrackedDataset load_dataset(const std::filesystem::path& path) {
    TrackedDataset dataset;
    for_each_line(path, [&](const std::string& text, const LineCtx& ctx) {
        const json obj = parse_line(text, ctx);
        check_keys(obj, {"id", "track_id", "input"}, {}, ctx);
        TrainSample s;
        s.id = int_field(obj, "id", ctx);
        s.track_id = int_field(obj, "track_id", ctx);
        if (s.id < 0) fail(ctx.path, ctx.line, "id must be non-negative");
        if (s.track_id < 0) fail(ctx.path, ctx.line, "track_id must be non-negative");
        const json& input = obj.at("input");
        if (!input.is_array() || input.empty()) {
            fail(ctx.path, ctx.line, "\"input\" must be a non-empty array");
        }
        for (const json& v : input) {
            if (!v.is_number()) fail(ctx.path, ctx.line, "\"input\" entries must be numbers");
            s.input.push_back(v.get<double>());
        }
        if (dataset.d_in == 0) {
            dataset.d_in = static_cast<int>(s.input.size());
        } else if (static_cast<int>(s.input.size()) != dataset.d_in) {
            fail(ctx.path, ctx.line,
                 "input dimension " + std::to_string(s.input.size()) + " differs from " +
                     std::to_string(dataset.d_in) + " seen earlier");
        }
        dataset.samples.push_back(std::move(s));
    });
    if (dataset.samples.empty()) throw InputError(path.string() + ": no samples");

    std::sort(dataset.samples.begin(), dataset.samples.end(),
              [](const TrainSample& a, const TrainSample& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].id != static_cast<std::int64_t>(i)) {
            throw InputError(path.string() + ": sample ids must exactly cover [0, " +
                             std::to_string(dataset.samples.size()) + "); " +
                             (dataset.samples[i].id < static_cast<std::int64_t>(i)
                                  ? "duplicate id "
                                  : "missing id ") +
                             std::to_string(std::min(dataset.samples[i].id,
                                                     static_cast<std::int64_t>(i))));
        }
    }
    return dataset;
}

std::vector<int> load_class_labels(const std::filesystem::path& path, std::size_t n_samples) {
    std::vector<int> labels(n_samples, -1);
    std::size_t seen = 0;
    for_each_line(path, [&](const std::string& text, const LineCtx& ctx) {
        const json obj = parse_line(text, ctx);
        check_keys(obj, {"id", "class_label"}, {}, ctx);
        const std::int64_t id = int_field(obj, "id", ctx);
        const std::int64_t label = int_field(obj, "class_label", ctx);
        if (id < 0 || id >= static_cast<std::int64_t>(n_samples)) {
            fail(ctx.path, ctx.line, "id " + std::to_string(id) + " outside [0, " +
                                         std::to_string(n_samples) + ")");
        }
        if (label < 0) fail(ctx.path, ctx.line, "class_label must be non-negative");
        if (labels[static_cast<std::size_t>(id)] != -1) {
            fail(ctx.path, ctx.line, "duplicate id " + std::to_string(id));
        }
        labels[static_cast<std::size_t>(id)] = static_cast<int>(label);
        ++seen;
    });
    if (seen != n_samples) {
        throw InputError(path.string() + ": got " + std::to_string(seen) + " labels for " +
                         std::to_string(n_samples) + " samples");
    }
    return labels;
}

void save_proposals(const std::vector<Snippet>& snippets, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (const Snippet& s : snippets) {
        for (const auto& frame : s.frames) {
            for (const BoundingBox& b : frame) {
                json obj = box_to_json(b);
                obj["snippet_id"] = s.snippet_id;
                out << obj.dump() << '\n';
            }
        }
    }
    finish_out(out, path);
}

void save_proposal_stream(std::int64_t snippet_id, const ProposalStream& stream,
                          const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (std::size_t p = 0; p < stream.frames.size(); ++p) {
        for (std::size_t j = 0; j < stream.frames[p].size(); ++j) {
            json obj = box_to_json(stream.frames[p][j]);
            obj["snippet_id"] = snippet_id;
            const std::int64_t gt = stream.gt_track_ids[p][j];
            if (gt >= 0) obj["gt_track_id"] = gt;
            out << obj.dump() << '\n';
        }
    }
    finish_out(out, path);
}

void save_flows(std::int64_t snippet_id, std::span<const FlowOffset> flows,
                const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (const FlowOffset& f : flows) {
        const json obj{{"snippet_id", snippet_id},
                       {"frame_index", f.frame_index},
                       {"dx", f.dx},
                       {"dy", f.dy}};
        out << obj.dump() << '\n';
    }
    finish_out(out, path);
}

void save_tracks(std::span<const SnippetTrack> tracks, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (const SnippetTrack& st : tracks) {
        json boxes = json::array();
        for (const BoundingBox& b : st.track.boxes) boxes.push_back(box_to_json(b));
        const json obj{{"track_id", st.track.id},
                       {"snippet_id", st.snippet_id},
                       {"score", st.track.score},
                       {"boxes", std::move(boxes)}};
        out << obj.dump() << '\n';
    }
    finish_out(out, path);
}

void save_dataset(const TrackedDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (const TrainSample& s : dataset.samples) {
        const json obj{{"id", s.id}, {"track_id", s.track_id}, {"input", s.input}};
        out << obj.dump() << '\n';
    }
    finish_out(out, path);
}

void save_class_labels(std::span<const int> class_labels, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < class_labels.size(); ++i) {
        const json obj{{"id", static_cast<std::int64_t>(i)}, {"class_label", class_labels[i]}};
        out << obj.dump() << '\n';
    }
    finish_out(out, path);
}

}  // namespace odct
