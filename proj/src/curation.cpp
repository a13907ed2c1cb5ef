#include "multishot/curation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "multishot/errors.hpp"

namespace multishot {

namespace fs = std::filesystem;

std::size_t BinaryMask::area() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

BinaryMask mask_from_image(const Image& img) {
    if (img.channels != 1) {
        throw DimensionMismatch("mask image must be single-channel, got " +
                                std::to_string(img.channels));
    }
    BinaryMask mask(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        mask.data[i] = img.data[i] >= 128 ? 1 : 0;
    }
    return mask;
}

Image mask_to_image(const BinaryMask& mask) {
    Image img(mask.width, mask.height, 1);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        img.data[i] = mask.data[i] ? 255 : 0;
    }
    return img;
}

Verdict duration_filter(double video_length_s) {
    return video_length_s > 1200.0 ? Verdict::reject : Verdict::accept;
}

std::vector<double> hsv_histogram(const Image& frame) {
    constexpr int kBins = 32;
    std::vector<double> hist(3 * kBins, 0.0);
    const std::size_t pixels = static_cast<std::size_t>(frame.width) * frame.height;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            Hsv hsv = frame.channels == 3
                          ? rgb_to_hsv(frame.at(x, y, 0), frame.at(x, y, 1), frame.at(x, y, 2))
                          : rgb_to_hsv(frame.at(x, y, 0), frame.at(x, y, 0), frame.at(x, y, 0));
            int hb = std::min(kBins - 1, static_cast<int>(hsv.h / 360.0 * kBins));
            int sb = std::min(kBins - 1, static_cast<int>(hsv.s * kBins));
            int vb = std::min(kBins - 1, static_cast<int>(hsv.v * kBins));
            hist[hb] += 1.0;
            hist[kBins + sb] += 1.0;
            hist[2 * kBins + vb] += 1.0;
        }
    }
    for (double& v : hist) v /= static_cast<double>(pixels);
    return hist;
}

std::vector<SegmentBoundary> detect_boundaries(const std::vector<Image>& frames,
                                               double threshold) {
    if (frames.empty()) throw EmptyShot("detect_boundaries needs at least one frame");
    std::vector<SegmentBoundary> boundaries{{0}};
    std::vector<double> prev = hsv_histogram(frames[0]);
    for (std::size_t k = 1; k < frames.size(); ++k) {
        std::vector<double> cur = hsv_histogram(frames[k]);
        double delta = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) delta += std::fabs(cur[i] - prev[i]);
        delta /= static_cast<double>(cur.size());
        if (delta > threshold) boundaries.push_back({static_cast<int>(k)});
        prev = std::move(cur);
    }
    return boundaries;
}

std::vector<FrameSpan> segment_video(const std::vector<SegmentBoundary>& boundaries,
                                     int total_frames, double fps, double target_s) {
    if (total_frames <= 0) throw InvalidSpec("segment_video: total_frames must be positive");
    if (boundaries.empty() || boundaries.front().frame_index != 0) {
        throw IntegrityError("segment_video: first boundary must be frame 0");
    }
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (boundaries[i].frame_index <= boundaries[i - 1].frame_index) {
            throw IntegrityError("segment_video: boundaries must be strictly increasing");
        }
    }

    // Candidate cut points: every boundary inside the video, plus the end.
    std::vector<int> cuts;
    for (const auto& b : boundaries) {
        if (b.frame_index > 0 && b.frame_index < total_frames) cuts.push_back(b.frame_index);
    }
    cuts.push_back(total_frames);

    std::vector<FrameSpan> segments;
    int start = 0;
    std::size_t next_cut = 0;
    while (start < total_frames) {
        int best = -1;
        double best_err = 0.0;
        for (std::size_t i = next_cut; i < cuts.size(); ++i) {
            double err = std::fabs((cuts[i] - start) / fps - target_s);
            if (best < 0 || err < best_err) {
                best = cuts[i];
                best_err = err;
                next_cut = i;
            }
        }
        segments.push_back({start, best});
        start = best;
        ++next_cut;
    }
    return segments;
}

std::vector<int> sample_candidate_frames(const ShotAnnotation& shot, double fps) {
    if (shot.start_frame >= shot.end_frame) {
        throw IntegrityError("sample_candidate_frames: empty shot range");
    }
    int step = std::max(1, static_cast<int>(std::llround(fps)));
    std::vector<int> indices;
    for (int f = shot.start_frame; f < shot.end_frame; f += step) indices.push_back(f);
    return indices;
}

namespace {

// Erosion pads with foreground outside the image, dilation with background,
// so a full-frame mask is a fixed point of both.
BinaryMask erode5(const BinaryMask& m) {
    BinaryMask out(m.width, m.height, 0);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            bool keep = true;
            for (int dy = -2; keep && dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
                    if (!m.at(nx, ny)) {
                        keep = false;
                        break;
                    }
                }
            }
            out.at(x, y) = keep ? 1 : 0;
        }
    }
    return out;
}

BinaryMask dilate5(const BinaryMask& m) {
    BinaryMask out(m.width, m.height, 0);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            bool hit = false;
            for (int dy = -2; !hit && dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
                    if (m.at(nx, ny)) {
                        hit = true;
                        break;
                    }
                }
            }
            out.at(x, y) = hit ? 1 : 0;
        }
    }
    return out;
}

// 4-connected component labels; 0 stays background, labels start at 1.
std::vector<int> label_components(const BinaryMask& m, int& count) {
    std::vector<int> labels(m.data.size(), 0);
    count = 0;
    std::vector<std::size_t> stack;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
            if (!m.data[idx] || labels[idx]) continue;
            ++count;
            labels[idx] = count;
            stack.push_back(idx);
            while (!stack.empty()) {
                std::size_t cur = stack.back();
                stack.pop_back();
                int cy = static_cast<int>(cur / m.width);
                int cx = static_cast<int>(cur % m.width);
                const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (const auto& d : nbr) {
                    int nx = cx + d[0], ny = cy + d[1];
                    if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
                    std::size_t nidx = static_cast<std::size_t>(ny) * m.width + nx;
                    if (m.data[nidx] && !labels[nidx]) {
                        labels[nidx] = count;
                        stack.push_back(nidx);
                    }
                }
            }
        }
    }
    return labels;
}

// Background regions not reachable from the border (4-connected).
BinaryMask fill_holes(const BinaryMask& m) {
    BinaryMask outside(m.width, m.height, 0);
    std::vector<std::size_t> stack;
    auto push = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= m.width || y >= m.height) return;
        std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
        if (!m.data[idx] && !outside.data[idx]) {
            outside.data[idx] = 1;
            stack.push_back(idx);
        }
    };
    for (int x = 0; x < m.width; ++x) {
        push(x, 0);
        push(x, m.height - 1);
    }
    for (int y = 0; y < m.height; ++y) {
        push(0, y);
        push(m.width - 1, y);
    }
    while (!stack.empty()) {
        std::size_t cur = stack.back();
        stack.pop_back();
        int cy = static_cast<int>(cur / m.width);
        int cx = static_cast<int>(cur % m.width);
        push(cx + 1, cy);
        push(cx - 1, cy);
        push(cx, cy + 1);
        push(cx, cy - 1);
    }
    BinaryMask out = m;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        if (!m.data[i] && !outside.data[i]) out.data[i] = 1;  // interior hole
    }
    return out;
}

// One contour per foreground boundary: outer boundaries plus hole
// boundaries, counted as components of foreground and enclosed background.
int contour_count(const BinaryMask& m) {
    int fg = 0;
    label_components(m, fg);

    // Hole boundaries count too; holes are the background pixels that
    // fill_holes would erase.
    BinaryMask filled = fill_holes(m);
    BinaryMask hole_mask(m.width, m.height, 0);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        hole_mask.data[i] = (!m.data[i] && filled.data[i]) ? 1 : 0;
    }
    int holes = 0;
    label_components(hole_mask, holes);
    return fg + holes;
}

}  // namespace

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::too_many_contours: return "too_many_contours";
        case RejectReason::too_many_components: return "too_many_components";
        case RejectReason::too_small: return "too_small";
        case RejectReason::too_large: return "too_large";
    }
    return "unknown";
}

RefineResult refine_mask(const BinaryMask& mask) {
    for (std::uint8_t v : mask.data) {
        if (v > 1) throw IntegrityError("refine_mask: mask values must be 0 or 1");
    }

    BinaryMask work = erode5(mask);   // open
    work = dilate5(work);
    work = dilate5(work);             // close
    work = erode5(work);
    work = fill_holes(work);

    if (contour_count(work) > 15) {
        return {std::nullopt, RejectReason::too_many_contours};
    }
    int components = 0;
    std::vector<int> labels = label_components(work, components);
    if (components > 5) {
        return {std::nullopt, RejectReason::too_many_components};
    }

    if (components > 0) {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(components) + 1, 0);
        for (int l : labels) {
            if (l > 0) ++sizes[static_cast<std::size_t>(l)];
        }
        int largest = 1;
        for (int l = 2; l <= components; ++l) {
            if (sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(largest)]) {
                largest = l;
            }
        }
        for (std::size_t i = 0; i < work.data.size(); ++i) {
            work.data[i] = labels[i] == largest ? 1 : 0;
        }
    }

    double fraction = static_cast<double>(work.area()) /
                      (static_cast<double>(work.width) * work.height);
    if (fraction < 0.05) return {std::nullopt, RejectReason::too_small};
    if (fraction > 0.90) return {std::nullopt, RejectReason::too_large};
    return {std::move(work), std::nullopt};
}

Image extract_reference(const Image& frame, const BinaryMask& mask) {
    if (frame.width != mask.width || frame.height != mask.height) {
        throw DimensionMismatch("extract_reference: frame " + std::to_string(frame.width) + "x" +
                                std::to_string(frame.height) + " vs mask " +
                                std::to_string(mask.width) + "x" + std::to_string(mask.height));
    }
    Image out(frame.width, frame.height, frame.channels);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            if (!mask.at(x, y)) continue;
            for (int c = 0; c < frame.channels; ++c) out.at(x, y, c) = frame.at(x, y, c);
        }
    }
    return out;
}

const char* to_string(ExternalModelClient::Role role) {
    switch (role) {
        case ExternalModelClient::Role::captioner: return "captioner";
        case ExternalModelClient::Role::segmenter: return "segmenter";
        case ExternalModelClient::Role::verifier: return "verifier";
    }
    return "unknown";
}

namespace {

class MockVerifier final : public ExternalModelClient {
public:
    Role role() const override { return Role::verifier; }

    std::string complete(const std::string&, const Image* image) override {
        if (!image) throw ClientError("mock verifier requires an image");
        bool any_content = std::any_of(image->data.begin(), image->data.end(),
                                       [](std::uint8_t v) { return v != 0; });
        return any_content ? "accept" : "reject";
    }
};

class FileVerifier final : public ExternalModelClient {
public:
    explicit FileVerifier(const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open client responses " + path.string());
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("client responses: invalid JSON (" + std::string(e.what()) + ")");
        }
        default_ = doc.value("default", "accept");
        if (doc.contains("responses")) {
            for (auto& [key, value] : doc["responses"].items()) {
                responses_[key] = value.get<std::string>();
            }
        }
    }

    Role role() const override { return Role::verifier; }

    std::string complete(const std::string&, const Image* image) override {
        if (!image) throw ClientError("file verifier requires an image");
        auto it = responses_.find(image_hash(*image));
        return it != responses_.end() ? it->second : default_;
    }

private:
    std::string default_;
    std::map<std::string, std::string> responses_;
};

fs::path g_asset_root;

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

}  // namespace

std::unique_ptr<ExternalModelClient> make_mock_verifier() {
    return std::make_unique<MockVerifier>();
}

std::unique_ptr<ExternalModelClient> make_file_verifier(const fs::path& responses) {
    return std::make_unique<FileVerifier>(responses);
}

void set_asset_root(const fs::path& dir) { g_asset_root = dir; }

std::string load_prompt_asset(const std::string& name) {
    std::vector<fs::path> candidates;
    if (!g_asset_root.empty()) candidates.push_back(g_asset_root / (name + ".txt"));
    if (const char* env = std::getenv("MULTISHOT_ASSETS")) {
        candidates.push_back(fs::path(env) / (name + ".txt"));
    }
    candidates.push_back(fs::path("assets/prompts") / (name + ".txt"));
#ifdef MULTISHOT_ASSET_DIR
    candidates.push_back(fs::path(MULTISHOT_ASSET_DIR) / (name + ".txt"));
#endif
    for (const auto& p : candidates) {
        std::ifstream in(p, std::ios::binary);
        if (in) {
            return std::string((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        }
    }
    throw IoError("prompt asset not found: " + name);
}

Verdict run_verifier(ExternalModelClient& client, const Image& reference,
                     const CharacterProfile& profile) {
    if (client.role() != ExternalModelClient::Role::verifier) {
        throw RoleMismatch("run_verifier requires a verifier client, got " +
                           std::string(to_string(client.role())));
    }
    std::string prompt = load_prompt_asset("verification");
    prompt = replace_all(prompt, "{character_id}", profile.character_id);
    prompt = replace_all(prompt, "{appearance}", profile.appearance);

    std::string verdict;
    try {
        verdict = client.complete(prompt, &reference);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ClientError("verifier for character '" + profile.character_id +
                          "' failed: " + e.what());
    }
    if (verdict == "accept") return Verdict::accept;
    if (verdict == "reject") return Verdict::reject;
    throw ClientError("verifier returned unparseable verdict '" + verdict + "'");
}

}  // namespace multishot
