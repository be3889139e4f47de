#include "pose/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pose/dataset.hpp"
#include "pose/error.hpp"
#include "pose/rng.hpp"

namespace pose {

namespace {

struct Stripes {
    double base;
    double amp;
    double period;
    double angle; // relative to the bar axis
    double width; // fraction of scale
};

// one texture per drawable, distinct on both sides
constexpr int kNumDrawables = 10;
const Stripes kTextures[kNumDrawables] = {
    {190.0, 55.0, 10.0, M_PI / 2, 0.200}, // torso
    {120.0, 70.0, 6.0, 0.0, 0.130},       // head
    {80.0, 60.0, 7.0, M_PI / 2, 0.055},   // upper arm L
    {160.0, 60.0, 7.0, 0.0, 0.055},       // upper arm R
    {210.0, 45.0, 5.0, M_PI / 4, 0.050},  // lower arm L
    {60.0, 50.0, 9.0, M_PI / 4, 0.050},   // lower arm R
    {140.0, 70.0, 11.0, M_PI / 2, 0.060}, // upper leg L
    {100.0, 65.0, 6.0, 0.0, 0.060},       // upper leg R
    {40.0, 40.0, 8.0, M_PI / 2, 0.055},   // lower leg L
    {180.0, 70.0, 12.0, 0.0, 0.055},      // lower leg R
};

void draw_bar(ImageBuffer& img, Vec2 a, Vec2 b, double half_thickness, const Stripes& tex) {
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len <= 0.0) return;
    const Vec2 axis = d * (1.0 / len);
    const double ca = std::cos(tex.angle);
    const double sa = std::sin(tex.angle);
    const Vec2 stripe_dir(axis.x * ca - axis.y * sa, axis.x * sa + axis.y * ca);

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - half_thickness)));
    const int x1 = std::min(img.width - 1,
                            static_cast<int>(std::ceil(std::max(a.x, b.x) + half_thickness)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - half_thickness)));
    const int y1 = std::min(img.height - 1,
                            static_cast<int>(std::ceil(std::max(a.y, b.y) + half_thickness)));

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 p(x + 0.5, y + 0.5);
            const Vec2 ap = p - a;
            const double t = std::clamp((ap.x * d.x + ap.y * d.y) / (len * len), 0.0, 1.0);
            const Vec2 proj = a + d * t;
            if (distance(p, proj) > half_thickness) continue;
            const double phase = ap.x * stripe_dir.x + ap.y * stripe_dir.y;
            const bool on = static_cast<long long>(std::floor(phase / tex.period)) % 2 == 0;
            const double v = tex.base + (on ? tex.amp : -tex.amp);
            img.set(x, y, 0, static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)));
        }
    }
}

void draw_clutter(ImageBuffer& img, Rng& rng, int bars) {
    for (int i = 0; i < bars; ++i) {
        const Stripes& tex = kTextures[rng.below(kNumDrawables)];
        const double len = rng.uniform(0.15, 0.45) * std::min(img.width, img.height);
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 a(rng.uniform(0.0, img.width), rng.uniform(0.0, img.height));
        const Vec2 b = a + Vec2(std::cos(ang), std::sin(ang)) * len;
        Stripes t = tex;
        t.period = rng.uniform(4.0, 13.0);
        draw_bar(img, a, b, rng.uniform(3.0, 7.0), t);
    }
}

struct FigureJoints {
    std::array<Vec2, kNumJoints> j;
};

Vec2 rotate(Vec2 v, double ang) {
    const double c = std::cos(ang);
    const double s = std::sin(ang);
    return {v.x * c - v.y * s, v.x * s + v.y * c};
}

// joints relative to the pelvis, +y down
FigureJoints sample_pose(const SynthConfig& cfg, Rng& rng, double scale) {
    FigureJoints f;
    const double s = scale;
    const Vec2 pelvis(0.0, 0.0);
    const Vec2 neck(0.0, -0.30 * s);

    f.j[kNeck] = neck;
    f.j[kHeadTop] = neck + rotate(Vec2(0.0, -0.15 * s), rng.uniform(-0.05, 0.05));
    f.j[kLeftShoulder] = neck + Vec2(-0.12 * s, 0.02 * s);
    f.j[kRightShoulder] = neck + Vec2(0.12 * s, 0.02 * s);
    f.j[kLeftHip] = pelvis + Vec2(-0.07 * s, 0.0);
    f.j[kRightHip] = pelvis + Vec2(0.07 * s, 0.0);

    // limbs hang downward with per-sample outward swing and bend
    const auto limb = [&](Vec2 from, double len, double ang) {
        return from + rotate(Vec2(0.0, len), ang);
    };
    const double ua_l = -(0.08 + rng.uniform(0.0, cfg.arm_swing));
    const double ua_r = 0.08 + rng.uniform(0.0, cfg.arm_swing);
    f.j[kLeftElbow] = limb(f.j[kLeftShoulder], 0.18 * s, ua_l);
    f.j[kRightElbow] = limb(f.j[kRightShoulder], 0.18 * s, ua_r);
    f.j[kLeftWrist] = limb(f.j[kLeftElbow], 0.18 * s, ua_l - rng.uniform(0.0, cfg.arm_bend));
    f.j[kRightWrist] = limb(f.j[kRightElbow], 0.18 * s, ua_r + rng.uniform(0.0, cfg.arm_bend));

    const double ul_l = -(0.04 + rng.uniform(0.0, cfg.leg_swing));
    const double ul_r = 0.04 + rng.uniform(0.0, cfg.leg_swing);
    f.j[kLeftKnee] = limb(f.j[kLeftHip], 0.27 * s, ul_l);
    f.j[kRightKnee] = limb(f.j[kRightHip], 0.27 * s, ul_r);
    f.j[kLeftAnkle] = limb(f.j[kLeftKnee], 0.28 * s,
                           ul_l + rng.uniform(-cfg.leg_bend * 0.3, cfg.leg_bend));
    f.j[kRightAnkle] = limb(f.j[kRightKnee], 0.28 * s,
                            ul_r - rng.uniform(-cfg.leg_bend * 0.3, cfg.leg_bend));

    const double lean = rng.uniform(-cfg.lean_range, cfg.lean_range);
    for (auto& p : f.j) p = rotate(p, lean);
    return f;
}

} // namespace

void SynthConfig::validate() const {
    if (scale_min < 100.0 || scale_max > 150.0 || scale_min > scale_max)
        fail("bad_arguments", "person scale must lie within [100, 150] px");
    if (image_width < 64 || image_height < 64)
        fail("bad_arguments", "synthetic images must be at least 64x64");
    if (limb_thickness <= 0.0 || clutter < 0.0)
        fail("bad_arguments", "bad synthetic render parameters");
    if (lean_range < 0.0 || arm_swing < 0.0 || arm_bend < 0.0 || leg_swing < 0.0 ||
        leg_bend < 0.0)
        fail("infeasible_pose_range", "pose jitter ranges must be non-negative");
}

SynthSample generate_figure(const SynthConfig& config, std::uint64_t index) {
    config.validate();
    Rng rng = Rng(config.seed).fork(index * 2 + 1);

    const double scale = rng.uniform(config.scale_min, config.scale_max);
    const FigureJoints pose = sample_pose(config, rng, scale);

    // place the figure fully inside the frame
    double minx = 1e18, miny = 1e18, maxx = -1e18, maxy = -1e18;
    for (const Vec2& p : pose.j) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double margin = config.limb_thickness * scale + 8.0;
    const double lo_x = margin - minx;
    const double hi_x = config.image_width - margin - maxx;
    const double lo_y = margin - miny;
    const double hi_y = config.image_height - margin - maxy;
    if (lo_x > hi_x || lo_y > hi_y)
        fail("infeasible_pose_range", "figure does not fit inside the image");
    const Vec2 origin(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y));

    std::array<Vec2, kNumJoints> j;
    for (int i = 0; i < kNumJoints; ++i) j[static_cast<size_t>(i)] = pose.j[static_cast<size_t>(i)] + origin;

    SynthSample sample;
    sample.image = ImageBuffer(config.image_width, config.image_height, 1, 128);
    draw_clutter(sample.image, rng, static_cast<int>(std::lround(12.0 * config.clutter)));

    const double limb_half = config.limb_thickness * scale * 0.5;
    const Vec2 pelvis = (j[kLeftHip] + j[kRightHip]) * 0.5;
    // legs, torso, arms, head; later bars overdraw earlier ones
    draw_bar(sample.image, j[kLeftKnee], j[kLeftAnkle], limb_half, kTextures[8]);
    draw_bar(sample.image, j[kRightKnee], j[kRightAnkle], limb_half, kTextures[9]);
    draw_bar(sample.image, j[kLeftHip], j[kLeftKnee], limb_half, kTextures[6]);
    draw_bar(sample.image, j[kRightHip], j[kRightKnee], limb_half, kTextures[7]);
    draw_bar(sample.image, j[kNeck], pelvis, kTextures[0].width * scale * 0.5, kTextures[0]);
    draw_bar(sample.image, j[kLeftShoulder], j[kLeftElbow], limb_half, kTextures[2]);
    draw_bar(sample.image, j[kRightShoulder], j[kRightElbow], limb_half, kTextures[3]);
    draw_bar(sample.image, j[kLeftElbow], j[kLeftWrist], limb_half, kTextures[4]);
    draw_bar(sample.image, j[kRightElbow], j[kRightWrist], limb_half, kTextures[5]);
    draw_bar(sample.image, j[kHeadTop], j[kNeck], kTextures[1].width * scale * 0.5, kTextures[1]);

    for (int i = 0; i < kNumJoints; ++i) {
        sample.ann.joints[static_cast<size_t>(i)].pt = j[static_cast<size_t>(i)];
        sample.ann.joints[static_cast<size_t>(i)].visible = true;
    }
    sample.ann.height_px = scale;

    // renderer-side part centers (centroids of own joints), indexed by part id
    const auto mid = [&](int a, int b) {
        return (j[static_cast<size_t>(a)] + j[static_cast<size_t>(b)]) * 0.5;
    };
    sample.part_centers.resize(25);
    sample.part_centers[0] = (j[kNeck] + j[kLeftShoulder] + j[kRightShoulder] + j[kLeftHip] +
                              j[kRightHip]) *
                             (1.0 / 5.0);
    sample.part_centers[1] =
        (j[kLeftHip] + j[kRightHip] + j[kLeftKnee] + j[kRightKnee]) * (1.0 / 4.0);
    sample.part_centers[2] = mid(kHeadTop, kNeck);
    sample.part_centers[3] = mid(kLeftShoulder, kLeftElbow);
    sample.part_centers[4] = mid(kRightShoulder, kRightElbow);
    sample.part_centers[5] = mid(kLeftElbow, kLeftWrist);
    sample.part_centers[6] = mid(kRightElbow, kRightWrist);
    sample.part_centers[7] = mid(kLeftHip, kLeftKnee);
    sample.part_centers[8] = mid(kRightHip, kRightKnee);
    sample.part_centers[9] = mid(kLeftKnee, kLeftAnkle);
    sample.part_centers[10] = mid(kRightKnee, kRightAnkle);
    for (int i = 0; i < kNumJoints; ++i)
        sample.part_centers[static_cast<size_t>(kJointPartBase + i)] = j[static_cast<size_t>(i)];
    return sample;
}

ImageBuffer generate_negative(const SynthConfig& config, std::uint64_t index) {
    config.validate();
    Rng rng = Rng(config.seed).fork(index * 2 + 2);
    ImageBuffer img(config.image_width, config.image_height, 1, 128);
    const int bars = std::max(6, static_cast<int>(std::lround(12.0 * std::max(config.clutter, 0.5))));
    draw_clutter(img, rng, bars);
    return img;
}

void write_synth_dataset(const SynthConfig& config, int n, const std::string& out_dir) {
    if (n < 1) fail("bad_arguments", "need n >= 1");
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "images");

    std::vector<Annotation> annotations;
    std::vector<std::string> pos_ids;
    char name[64];
    for (int i = 0; i < n; ++i) {
        SynthSample s = generate_figure(config, static_cast<std::uint64_t>(i));
        std::snprintf(name, sizeof(name), "images/pos_%04d.pgm", i);
        s.ann.image_id = name;
        write_pnm(s.image, (fs::path(out_dir) / name).string());
        annotations.push_back(s.ann);
        pos_ids.emplace_back(name);
    }
    const int n_neg = std::max(4, n / 2);
    std::vector<std::string> neg_ids;
    for (int i = 0; i < n_neg; ++i) {
        std::snprintf(name, sizeof(name), "images/neg_%04d.pgm", i);
        write_pnm(generate_negative(config, static_cast<std::uint64_t>(i)),
                  (fs::path(out_dir) / name).string());
        neg_ids.emplace_back(name);
    }
    write_annotations(annotations, (fs::path(out_dir) / "annotations.jsonl").string());

    const int n_train = (n + 1) / 2;
    nlohmann::json manifest{
        {"annotations", "annotations.jsonl"},
        {"root", "."},
        {"train", std::vector<std::string>(pos_ids.begin(), pos_ids.begin() + n_train)},
        {"test", std::vector<std::string>(pos_ids.begin() + n_train, pos_ids.end())},
        {"negatives", neg_ids},
    };
    const std::string mpath = (fs::path(out_dir) / "manifest.json").string();
    {
        std::ofstream out(mpath + ".tmp", std::ios::trunc);
        if (!out) fail("io_error", "cannot write manifest: " + mpath);
        out << manifest.dump(2) << "\n";
    }
    std::error_code ec;
    fs::rename(mpath + ".tmp", mpath, ec);
    if (ec) fail("io_error", "rename failed for " + mpath + ": " + ec.message());
}

} // namespace pose
