#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace multishot {

using OrderedJson = nlohmann::ordered_json;

struct ReferenceImageRef {
    int frame_index = 0;
    std::string mask_path;  // relative to the dataset root

    bool operator==(const ReferenceImageRef&) const = default;
};

struct CharacterProfile {
    std::string character_id;
    std::string appearance;
    std::vector<ReferenceImageRef> reference_image_refs;

    bool operator==(const CharacterProfile&) const = default;
};

struct AudioAnnotation {
    std::string description;
    std::vector<std::string> sources;

    bool operator==(const AudioAnnotation&) const = default;
};

struct ShotAnnotation {
    int shot_index = 0;
    std::string scene_id;
    std::vector<std::string> character_ids;
    std::string narrative_caption;
    std::string descriptive_caption;
    int start_frame = 0;
    int end_frame = 0;  // exclusive
    std::optional<AudioAnnotation> audio;

    int frame_count() const { return end_frame - start_frame; }
    bool operator==(const ShotAnnotation&) const = default;
};

struct SceneDescription {
    std::string scene_id;
    std::string description;

    bool operator==(const SceneDescription&) const = default;
};

struct StoryAnnotation {
    std::string story_id;
    std::string storyline;
    std::vector<SceneDescription> scenes;
    std::vector<CharacterProfile> characters;
    std::vector<ShotAnnotation> shots;
    double fps = 0.0;

    bool operator==(const StoryAnnotation&) const = default;
};

struct DatasetManifest {
    std::filesystem::path root_path;
    std::vector<std::string> stories;
    int schema_version = 1;

    std::filesystem::path story_path(const std::string& story_id) const {
        return root_path / "stories" / (story_id + ".json");
    }
    std::filesystem::path video_dir(const std::string& story_id) const {
        return root_path / "videos" / story_id;
    }
    std::filesystem::path frame_path(const std::string& story_id, int frame_index) const;
};

// Loads and fully validates a story document. Mask paths are resolved against
// the dataset root, taken to be the parent of the containing `stories/`
// directory (or the file's own directory otherwise). Throws SchemaError for
// missing or mistyped fields and IntegrityError for violated cross-references
// or non-tiling shot ranges.
StoryAnnotation load_story(const std::filesystem::path& path);
StoryAnnotation story_from_json(const OrderedJson& doc, const std::filesystem::path& dataset_root);

OrderedJson story_to_json(const StoryAnnotation& story);
void write_story(const StoryAnnotation& story, const std::filesystem::path& path);

DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest);

// Validation applied by load_story; exposed for documents built in memory.
void validate_story(const StoryAnnotation& story, const std::filesystem::path& dataset_root);

struct StatsLevel {
    std::size_t total_num = 0;
    std::optional<double> avg_dur_s;
    std::optional<double> avg_caption_w;
    std::optional<double> avg_chars;
    std::optional<double> avg_scenes;
};

struct StatsReport {
    StatsLevel story_level;
    StatsLevel shot_level;

    OrderedJson to_json() const;
};

// Corpus statistics. Shot captions count narrative plus descriptive words
// combined; the story row counts storyline words. Means are absent for an
// empty manifest.
StatsReport dataset_stats(const DatasetManifest& manifest);
StatsReport dataset_stats(const std::vector<StoryAnnotation>& stories);

std::size_t word_count(const std::string& text);

}  // namespace multishot
