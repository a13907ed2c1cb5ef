#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "multishot/story.hpp"

namespace multishot {

struct SynthSpec {
    int num_stories = 1;
    int shots_per_story = 1;
    int frames_per_shot = 1;
    int image_size = 32;  // square frames, must be divisible by 8
    std::uint64_t seed = 0;
};

// Procedurally renders a toy corpus: per story one colored sprite drifting
// over a plain background, one reference mask, and template captions. Output
// is a full on-disk dataset (stories/, videos/, masks/, manifest.json) that
// is byte-identical for identical specs.
DatasetManifest synthesize_dataset(const SynthSpec& spec, const std::filesystem::path& root);

// Every word the caption templates can emit. The model vocabulary is built
// from this list, so captions tokenize without <unk> fallbacks.
const std::vector<std::string>& caption_lexicon();

// Fixed 8 fps for synthetic stories.
double synthetic_fps();

}  // namespace multishot
