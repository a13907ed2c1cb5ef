#include "multishot/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "multishot/errors.hpp"
#include "multishot/image.hpp"

namespace multishot {

namespace fs = std::filesystem;

namespace {

const char* kHueNames[12] = {"red",  "orange", "amber", "yellow", "lime",   "green",
                             "teal", "cyan",   "azure", "blue",   "violet", "magenta"};

struct Direction {
    const char* name;
    int dx, dy;
};

const Direction kDirections[8] = {
    {"north", 0, -1}, {"northeast", 1, -1}, {"east", 1, 0},  {"southeast", 1, 1},
    {"south", 0, 1},  {"southwest", -1, 1}, {"west", -1, 0}, {"northwest", -1, -1},
};

std::string zero_pad(int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

// Sprite rendered as a filled disc; the mask is its silhouette.
void draw_sprite(Image& frame, double cx, double cy, double radius,
                 const std::array<std::uint8_t, 3>& color, Image* mask) {
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            double dx = x + 0.5 - cx;
            double dy = y + 0.5 - cy;
            if (dx * dx + dy * dy <= radius * radius) {
                frame.at(x, y, 0) = color[0];
                frame.at(x, y, 1) = color[1];
                frame.at(x, y, 2) = color[2];
                if (mask) mask->at(x, y, 0) = 255;
            }
        }
    }
}

}  // namespace

double synthetic_fps() { return 8.0; }

const std::vector<std::string>& caption_lexicon() {
    static const std::vector<std::string> lexicon = [] {
        std::vector<std::string> words = {
            "a",      "the",        "character", "circle", "on",     "plain",
            "gray",   "background", "moving",    "moves",  "across", "scene",
            "wanders", "through",   "world",
        };
        for (const char* h : kHueNames) words.emplace_back(h);
        for (const Direction& d : kDirections) words.emplace_back(d.name);
        return words;
    }();
    return lexicon;
}

DatasetManifest synthesize_dataset(const SynthSpec& spec, const fs::path& root) {
    if (spec.num_stories < 1 || spec.shots_per_story < 1 || spec.frames_per_shot < 1) {
        throw InvalidSpec("all counts must be at least 1");
    }
    if (spec.image_size < 8 || spec.image_size % 8 != 0) {
        throw InvalidSpec("image_size must be a positive multiple of 8, got " +
                          std::to_string(spec.image_size));
    }

    std::mt19937_64 rng(spec.seed);
    const int size = spec.image_size;
    const double radius = size / 6.0;
    const double fps = synthetic_fps();

    DatasetManifest manifest;
    manifest.root_path = root;
    manifest.schema_version = 1;

    for (int s = 0; s < spec.num_stories; ++s) {
        const std::string story_id = "story_" + zero_pad(s, 4);
        const double hue = std::fmod(s * 137.50776405003785, 360.0);
        const std::string hue_name = kHueNames[static_cast<int>(hue / 30.0) % 12];
        const auto color = hsv_to_rgb(hue, 0.8, 0.9);

        StoryAnnotation story;
        story.story_id = story_id;
        story.fps = fps;
        story.storyline = "the " + hue_name + " character wanders through a plain gray world";
        story.scenes.push_back({"scene_0", "a plain gray background"});

        CharacterProfile profile;
        profile.character_id = "char_0";
        profile.appearance = "a " + hue_name + " circle character";

        double cx = size / 2.0, cy = size / 2.0;
        Image reference_mask;

        for (int k = 0; k < spec.shots_per_story; ++k) {
            const Direction& dir = kDirections[rng() % 8];
            const double step = std::max(1.0, size / 16.0);

            ShotAnnotation shot;
            shot.shot_index = k;
            shot.scene_id = "scene_0";
            shot.character_ids = {"char_0"};
            shot.descriptive_caption = "a " + hue_name +
                                       " circle character on a plain gray background moving " +
                                       dir.name;
            shot.narrative_caption =
                "the " + hue_name + " character moves " + std::string(dir.name) +
                " across the scene";
            shot.start_frame = k * spec.frames_per_shot;
            shot.end_frame = (k + 1) * spec.frames_per_shot;

            for (int f = shot.start_frame; f < shot.end_frame; ++f) {
                Image frame(size, size, 3, 200);
                Image mask(size, size, 1, 0);
                draw_sprite(frame, cx, cy, radius, color, &mask);
                write_png(manifest.frame_path(story_id, f), frame);
                if (f == 0) reference_mask = mask;  // silhouette in the story's first frame
                cx = std::clamp(cx + dir.dx * step, radius, size - radius);
                cy = std::clamp(cy + dir.dy * step, radius, size - radius);
            }
            story.shots.push_back(std::move(shot));
        }

        const std::string mask_rel = "masks/" + story_id + "/char_0_000000.png";
        write_png(root / mask_rel, reference_mask);
        profile.reference_image_refs.push_back({0, mask_rel});
        story.characters.push_back(std::move(profile));

        write_story(story, root / "stories" / (story_id + ".json"));
        manifest.stories.push_back(story_id);
    }

    write_manifest(manifest);
    return manifest;
}

}  // namespace multishot
