#include "multishot/story.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "multishot/errors.hpp"

namespace multishot {

namespace fs = std::filesystem;

namespace {

const OrderedJson& require_field(const OrderedJson& j, const char* field, const char* context) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw SchemaError(std::string(context) + ": missing field '" + field + "'");
    }
    return *it;
}

std::string require_string(const OrderedJson& j, const char* field, const char* context) {
    const auto& v = require_field(j, field, context);
    if (!v.is_string()) {
        throw SchemaError(std::string(context) + ": field '" + field + "' must be a string");
    }
    return v.get<std::string>();
}

int require_int(const OrderedJson& j, const char* field, const char* context) {
    const auto& v = require_field(j, field, context);
    if (!v.is_number_integer()) {
        throw SchemaError(std::string(context) + ": field '" + field + "' must be an integer");
    }
    return v.get<int>();
}

double require_number(const OrderedJson& j, const char* field, const char* context) {
    const auto& v = require_field(j, field, context);
    if (!v.is_number()) {
        throw SchemaError(std::string(context) + ": field '" + field + "' must be a number");
    }
    return v.get<double>();
}

const OrderedJson& require_array(const OrderedJson& j, const char* field, const char* context) {
    const auto& v = require_field(j, field, context);
    if (!v.is_array()) {
        throw SchemaError(std::string(context) + ": field '" + field + "' must be an array");
    }
    return v;
}

}  // namespace

std::size_t word_count(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    std::size_t n = 0;
    while (in >> w) ++n;
    return n;
}

std::filesystem::path DatasetManifest::frame_path(const std::string& story_id,
                                                  int frame_index) const {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.png", frame_index);
    return video_dir(story_id) / name;
}

StoryAnnotation story_from_json(const OrderedJson& doc, const fs::path& dataset_root) {
    if (!doc.is_object()) throw SchemaError("story: document must be a JSON object");

    StoryAnnotation story;
    story.story_id = require_string(doc, "story_id", "story");
    story.storyline = require_string(doc, "storyline", "story");
    story.fps = require_number(doc, "fps", "story");

    for (const auto& s : require_array(doc, "scenes", "story")) {
        SceneDescription scene;
        scene.scene_id = require_string(s, "scene_id", "scene");
        scene.description = require_string(s, "description", "scene");
        story.scenes.push_back(std::move(scene));
    }

    for (const auto& c : require_array(doc, "characters", "story")) {
        CharacterProfile profile;
        profile.character_id = require_string(c, "character_id", "character");
        profile.appearance = require_string(c, "appearance", "character");
        for (const auto& r : require_array(c, "reference_image_refs", "character")) {
            ReferenceImageRef ref;
            ref.frame_index = require_int(r, "frame_index", "reference_image_ref");
            ref.mask_path = require_string(r, "mask_path", "reference_image_ref");
            profile.reference_image_refs.push_back(std::move(ref));
        }
        story.characters.push_back(std::move(profile));
    }

    for (const auto& sh : require_array(doc, "shots", "story")) {
        ShotAnnotation shot;
        shot.shot_index = require_int(sh, "shot_index", "shot");
        shot.scene_id = require_string(sh, "scene_id", "shot");
        for (const auto& id : require_array(sh, "character_ids", "shot")) {
            if (!id.is_string()) throw SchemaError("shot: 'character_ids' entries must be strings");
            shot.character_ids.push_back(id.get<std::string>());
        }
        shot.narrative_caption = require_string(sh, "narrative_caption", "shot");
        shot.descriptive_caption = require_string(sh, "descriptive_caption", "shot");
        shot.start_frame = require_int(sh, "start_frame", "shot");
        shot.end_frame = require_int(sh, "end_frame", "shot");
        if (auto it = sh.find("audio"); it != sh.end() && !it->is_null()) {
            AudioAnnotation audio;
            audio.description = require_string(*it, "description", "audio");
            for (const auto& src : require_array(*it, "sources", "audio")) {
                if (!src.is_string()) throw SchemaError("audio: 'sources' entries must be strings");
                audio.sources.push_back(src.get<std::string>());
            }
            shot.audio = std::move(audio);
        }
        story.shots.push_back(std::move(shot));
    }

    validate_story(story, dataset_root);
    return story;
}

void validate_story(const StoryAnnotation& story, const fs::path& dataset_root) {
    if (story.story_id.empty()) throw SchemaError("story: 'story_id' must be non-empty");
    if (!(story.fps > 0.0)) throw SchemaError("story: 'fps' must be positive");
    if (story.shots.empty()) throw IntegrityError("story " + story.story_id + ": needs at least one shot");

    std::set<std::string> character_ids;
    for (const auto& c : story.characters) {
        if (c.character_id.empty()) {
            throw SchemaError("character: 'character_id' must be non-empty");
        }
        if (!character_ids.insert(c.character_id).second) {
            throw IntegrityError("story " + story.story_id + ": duplicate character_id '" +
                                 c.character_id + "'");
        }
        for (const auto& ref : c.reference_image_refs) {
            fs::path mask = dataset_root / ref.mask_path;
            if (!fs::exists(mask)) {
                throw IntegrityError("character '" + c.character_id +
                                     "': mask file not found: " + mask.string());
            }
        }
    }

    std::set<std::string> scene_ids;
    for (const auto& s : story.scenes) {
        if (!scene_ids.insert(s.scene_id).second) {
            throw IntegrityError("story " + story.story_id + ": duplicate scene_id '" +
                                 s.scene_id + "'");
        }
    }

    for (std::size_t i = 0; i < story.shots.size(); ++i) {
        const auto& shot = story.shots[i];
        const std::string where = "shot " + std::to_string(i);
        if (shot.shot_index != static_cast<int>(i)) {
            throw IntegrityError(where + ": shot_index " + std::to_string(shot.shot_index) +
                                 " does not match position " + std::to_string(i));
        }
        if (shot.start_frame >= shot.end_frame) {
            throw IntegrityError(where + ": start_frame " + std::to_string(shot.start_frame) +
                                 " must be below end_frame " + std::to_string(shot.end_frame));
        }
        if (shot.narrative_caption.empty() || shot.descriptive_caption.empty()) {
            throw IntegrityError(where + ": captions must be non-empty");
        }
        if (!scene_ids.count(shot.scene_id)) {
            throw IntegrityError(where + ": scene_id '" + shot.scene_id + "' is not declared");
        }
        for (const auto& cid : shot.character_ids) {
            if (!character_ids.count(cid)) {
                throw IntegrityError(where + ": character_id '" + cid + "' is not declared");
            }
        }
        if (i > 0 && story.shots[i - 1].end_frame != shot.start_frame) {
            throw IntegrityError(where + ": frame range gap or overlap, previous shot ends at " +
                                 std::to_string(story.shots[i - 1].end_frame) +
                                 " but this shot starts at " + std::to_string(shot.start_frame));
        }
    }
}

StoryAnnotation load_story(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open story file " + path.string());
    OrderedJson doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("story " + path.string() + ": invalid JSON (" + e.what() + ")");
    }
    fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::path root = dir.filename() == "stories" ? dir.parent_path() : dir;
    return story_from_json(doc, root);
}

OrderedJson story_to_json(const StoryAnnotation& story) {
    OrderedJson doc;
    doc["story_id"] = story.story_id;
    doc["storyline"] = story.storyline;
    doc["scenes"] = OrderedJson::array();
    for (const auto& s : story.scenes) {
        doc["scenes"].push_back({{"scene_id", s.scene_id}, {"description", s.description}});
    }
    doc["characters"] = OrderedJson::array();
    for (const auto& c : story.characters) {
        OrderedJson refs = OrderedJson::array();
        for (const auto& r : c.reference_image_refs) {
            refs.push_back({{"frame_index", r.frame_index}, {"mask_path", r.mask_path}});
        }
        doc["characters"].push_back({{"character_id", c.character_id},
                                     {"appearance", c.appearance},
                                     {"reference_image_refs", std::move(refs)}});
    }
    doc["shots"] = OrderedJson::array();
    for (const auto& sh : story.shots) {
        OrderedJson shot{{"shot_index", sh.shot_index},
                         {"scene_id", sh.scene_id},
                         {"character_ids", sh.character_ids},
                         {"narrative_caption", sh.narrative_caption},
                         {"descriptive_caption", sh.descriptive_caption},
                         {"start_frame", sh.start_frame},
                         {"end_frame", sh.end_frame}};
        if (sh.audio) {
            shot["audio"] = {{"description", sh.audio->description},
                             {"sources", sh.audio->sources}};
        }
        doc["shots"].push_back(std::move(shot));
    }
    doc["fps"] = story.fps;
    return doc;
}

void write_story(const StoryAnnotation& story, const fs::path& path) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write story file " + path.string());
    out << story_to_json(story).dump(2) << "\n";
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    OrderedJson doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("manifest " + path.string() + ": invalid JSON (" + e.what() + ")");
    }
    DatasetManifest m;
    std::string root = require_string(doc, "root_path", "manifest");
    fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    m.root_path = root == "." ? base : base / root;
    for (const auto& s : require_array(doc, "stories", "manifest")) {
        if (!s.is_string()) throw SchemaError("manifest: 'stories' entries must be strings");
        m.stories.push_back(s.get<std::string>());
    }
    m.schema_version = require_int(doc, "schema_version", "manifest");
    return m;
}

void write_manifest(const DatasetManifest& manifest) {
    fs::create_directories(manifest.root_path);
    OrderedJson doc{{"root_path", "."},
                    {"stories", manifest.stories},
                    {"schema_version", manifest.schema_version}};
    std::ofstream out(manifest.root_path / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest under " + manifest.root_path.string());
    out << doc.dump(2) << "\n";
}

StatsReport dataset_stats(const std::vector<StoryAnnotation>& stories) {
    StatsReport report;
    report.story_level.total_num = stories.size();

    std::size_t shot_count = 0;
    double story_dur = 0.0, storyline_words = 0.0, chars = 0.0, scenes = 0.0;
    double shot_dur = 0.0, caption_words = 0.0;
    for (const auto& story : stories) {
        double dur = 0.0;
        for (const auto& shot : story.shots) {
            double d = shot.frame_count() / story.fps;
            dur += d;
            shot_dur += d;
            caption_words += static_cast<double>(word_count(shot.narrative_caption) +
                                                 word_count(shot.descriptive_caption));
            ++shot_count;
        }
        story_dur += dur;
        storyline_words += static_cast<double>(word_count(story.storyline));
        chars += static_cast<double>(story.characters.size());
        scenes += static_cast<double>(story.scenes.size());
    }
    report.shot_level.total_num = shot_count;

    if (!stories.empty()) {
        double n = static_cast<double>(stories.size());
        report.story_level.avg_dur_s = story_dur / n;
        report.story_level.avg_caption_w = storyline_words / n;
        report.story_level.avg_chars = chars / n;
        report.story_level.avg_scenes = scenes / n;
    }
    if (shot_count > 0) {
        double n = static_cast<double>(shot_count);
        report.shot_level.avg_dur_s = shot_dur / n;
        report.shot_level.avg_caption_w = caption_words / n;
    }
    return report;
}

StatsReport dataset_stats(const DatasetManifest& manifest) {
    std::vector<StoryAnnotation> stories;
    stories.reserve(manifest.stories.size());
    for (const auto& id : manifest.stories) {
        stories.push_back(load_story(manifest.story_path(id)));
    }
    return dataset_stats(stories);
}

namespace {

OrderedJson level_json(const StatsLevel& level, bool with_story_columns) {
    auto opt = [](const std::optional<double>& v) {
        return v ? OrderedJson(*v) : OrderedJson(nullptr);
    };
    OrderedJson j{{"total_num", level.total_num},
                  {"avg_dur_s", opt(level.avg_dur_s)},
                  {"avg_caption_w", opt(level.avg_caption_w)}};
    if (with_story_columns) {
        j["avg_chars"] = opt(level.avg_chars);
        j["avg_scenes"] = opt(level.avg_scenes);
    }
    return j;
}

}  // namespace

OrderedJson StatsReport::to_json() const {
    return OrderedJson{{"story_level", level_json(story_level, true)},
                       {"shot_level", level_json(shot_level, false)}};
}

}  // namespace multishot
