#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "multishot/image.hpp"
#include "multishot/story.hpp"

namespace multishot {

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // strictly 0 or 1

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t area() const;

    bool operator==(const BinaryMask&) const = default;
};

// Grayscale {0,255} PNG convention for masks on disk.
BinaryMask mask_from_image(const Image& img);
Image mask_to_image(const BinaryMask& mask);

struct SegmentBoundary {
    int frame_index = 0;

    bool operator==(const SegmentBoundary&) const = default;
};

struct FrameSpan {
    int start_frame = 0;
    int end_frame = 0;  // exclusive

    bool operator==(const FrameSpan&) const = default;
};

enum class Verdict { accept, reject };

/// Accepts everything up to and including 20 minutes.
Verdict duration_filter(double video_length_s);

// Boundary at frame k whenever the mean absolute difference between the
// 32-bin-per-channel HSV histograms of frames k-1 and k exceeds the
// threshold. Frame 0 is always a boundary.
std::vector<SegmentBoundary> detect_boundaries(const std::vector<Image>& frames,
                                               double threshold);

// Normalized 96-bin histogram (32 per HSV channel) used by boundary
// detection; exposed so thresholds can be derived from known content.
std::vector<double> hsv_histogram(const Image& frame);

// Greedy left-to-right grouping of boundary-delimited spans; each segment
// closes at the cut point whose duration lands closest to target_s. Output
// tiles [0, total_frames).
std::vector<FrameSpan> segment_video(const std::vector<SegmentBoundary>& boundaries,
                                     int total_frames, double fps, double target_s = 60.0);

// 1 fps candidate sampling within a shot: start_frame, start+round(fps), ...
std::vector<int> sample_candidate_frames(const ShotAnnotation& shot, double fps);

enum class RejectReason { too_many_contours, too_many_components, too_small, too_large };
const char* to_string(RejectReason reason);

struct RefineResult {
    std::optional<BinaryMask> mask;  // present iff accepted
    std::optional<RejectReason> reason;

    bool accepted() const { return mask.has_value(); }
};

// Mask post-processing pipeline: 5x5 open then close, hole filling, contour
// (>15) and 4-connected component (>5) rejection, largest-component
// retention, and 5%..90% area gating.
RefineResult refine_mask(const BinaryMask& mask);

// Pixel-wise application of a mask: foreground keeps the frame pixel,
// background goes black.
Image extract_reference(const Image& frame, const BinaryMask& mask);

// Stand-in for the external captioner/segmenter/verifier models. Mock
// implementations must be pure functions of their inputs.
class ExternalModelClient {
public:
    enum class Role { captioner, segmenter, verifier };

    virtual ~ExternalModelClient() = default;
    virtual Role role() const = 0;
    virtual std::string complete(const std::string& prompt, const Image* image) = 0;
};

const char* to_string(ExternalModelClient::Role role);

// Built-in deterministic verifier: rejects references with no visible
// content (all-black images), accepts everything else.
std::unique_ptr<ExternalModelClient> make_mock_verifier();

// Canned-response verifier: looks verdicts up by image content hash in a
// JSON file {"default": "accept", "responses": {"<hash>": "reject"}}.
std::unique_ptr<ExternalModelClient> make_file_verifier(const std::filesystem::path& responses);

// Forwards the reference-filtering prompt plus the image to a verifier
// client and returns its verdict unchanged.
Verdict run_verifier(ExternalModelClient& client, const Image& reference,
                     const CharacterProfile& profile);

// Prompt templates shipped as text assets; `name` is the file stem, e.g.
// "verification". Looked up next to the executable and via MULTISHOT_ASSETS.
std::string load_prompt_asset(const std::string& name);
void set_asset_root(const std::filesystem::path& dir);

}  // namespace multishot
