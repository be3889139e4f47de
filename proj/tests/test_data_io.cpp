#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pose/dataset.hpp"
#include "pose/error.hpp"
#include "pose/model_io.hpp"
#include "pose/pipeline.hpp"
#include "pose/rng.hpp"
#include "pose/synthetic.hpp"

#include "support.hpp"

using namespace pose;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pose_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("pnm images round-trip and reject junk") {
    TempDir tmp;
    Rng rng(1);
    ImageBuffer img(33, 21, 1);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const std::string path = (tmp.path / "a.pgm").string();
    write_pnm(img, path);
    const ImageBuffer back = read_pnm(path);
    CHECK(back.width == 33);
    CHECK(back.height == 21);
    CHECK(back.pixels == img.pixels);
    CHECK_FALSE(fs::exists(path + ".tmp"));

    ImageBuffer rgb(5, 4, 3);
    const std::string p3 = (tmp.path / "b.ppm").string();
    write_pnm(rgb, p3);
    CHECK(read_pnm(p3).channels == 3);

    std::ofstream bad(tmp.path / "bad.pgm", std::ios::binary);
    bad << "P9 10 10 255\n";
    bad.close();
    CHECK_THROWS_AS(read_pnm((tmp.path / "bad.pgm").string()), Error);
    CHECK_THROWS_AS(read_pnm((tmp.path / "missing.pgm").string()), Error);
}

TEST_CASE("annotations round-trip byte-identically for canonical files") {
    TempDir tmp;
    SynthConfig cfg;
    cfg.seed = 31;
    std::vector<Annotation> anns;
    for (int i = 0; i < 4; ++i) {
        SynthSample s = generate_figure(cfg, static_cast<std::uint64_t>(i));
        s.ann.image_id = "images/img_" + std::to_string(i) + ".pgm";
        anns.push_back(s.ann);
    }
    const std::string p1 = (tmp.path / "a.jsonl").string();
    write_annotations(anns, p1);
    const auto loaded = load_annotations(p1);
    REQUIRE(loaded.size() == anns.size());
    const std::string p2 = (tmp.path / "b.jsonl").string();
    write_annotations(loaded, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("malformed annotation lines are reported with their line number") {
    TempDir tmp;
    const std::string path = (tmp.path / "bad.jsonl").string();
    {
        std::ofstream out(path);
        out << R"({"height_px":150.0,"image":"a.pgm","joints":[[1,2,1],[3,4,1],[5,6,1],[7,8,1],[9,10,1],[11,12,1],[13,14,1],[15,16,1],[17,18,1],[19,20,1],[21,22,1],[23,24,1],[25,26,1]]})"
            << "\n";
    }
    try {
        load_annotations(path);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.category()) == "bad_annotation");
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        CHECK(std::string(e.what()).find("13") != std::string::npos);
    }
}

TEST_CASE("joint remap reorders loaded joints") {
    TempDir tmp;
    Annotation ann;
    ann.image_id = "x.pgm";
    ann.height_px = 150;
    for (int j = 0; j < kNumJoints; ++j) {
        ann.joints[static_cast<size_t>(j)].pt = Vec2(j, j);
        ann.joints[static_cast<size_t>(j)].visible = true;
    }
    const std::string path = (tmp.path / "a.jsonl").string();
    write_annotations({ann}, path);

    std::vector<int> remap(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) remap[static_cast<size_t>(j)] = kNumJoints - 1 - j;
    const auto loaded = load_annotations(path, remap);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].joints[kNumJoints - 1].pt.x == doctest::Approx(0.0));
    CHECK(loaded[0].joints[0].pt.x == doctest::Approx(13.0));
}

TEST_CASE("synthetic generation is deterministic and honors clutter zero") {
    SynthConfig cfg;
    cfg.seed = 99;
    cfg.clutter = 0.0;
    const SynthSample a = generate_figure(cfg, 3);
    const SynthSample b = generate_figure(cfg, 3);
    CHECK(a.image.pixels == b.image.pixels);
    for (int j = 0; j < kNumJoints; ++j) {
        CHECK(a.ann.joints[static_cast<size_t>(j)].pt.x == b.ann.joints[static_cast<size_t>(j)].pt.x);
        CHECK(a.ann.joints[static_cast<size_t>(j)].pt.y == b.ann.joints[static_cast<size_t>(j)].pt.y);
    }

    // with clutter 0 everything off the figure is flat background
    double minx = 1e9, miny = 1e9, maxx = -1e9, maxy = -1e9;
    for (const auto& j : a.ann.joints) {
        minx = std::min(minx, j.pt.x);
        maxx = std::max(maxx, j.pt.x);
        miny = std::min(miny, j.pt.y);
        maxy = std::max(maxy, j.pt.y);
    }
    const double pad = 20.0;
    for (int y = 0; y < a.image.height; ++y)
        for (int x = 0; x < a.image.width; ++x)
            if (x < minx - pad || x > maxx + pad || y < miny - pad || y > maxy + pad)
                CHECK(a.image.at(x, y) == 128);

    CHECK_THROWS_AS([] {
        SynthConfig bad;
        bad.scale_min = 20;
        bad.validate();
    }(), Error);
}

TEST_CASE("synthetic dataset loads through the manifest with rescaling") {
    TempDir tmp;
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.scale_min = 120;
    cfg.scale_max = 120;
    cfg.image_width = 200;
    cfg.image_height = 240;
    write_synth_dataset(cfg, 4, tmp.path.string());

    CHECK(fs::exists(tmp.path / "manifest.json"));
    CHECK(fs::exists(tmp.path / "annotations.jsonl"));
    CHECK(fs::exists(tmp.path / "images/pos_0003.pgm"));

    const Dataset ds = load_dataset((tmp.path / "manifest.json").string(), true);
    CHECK(ds.train.size() == 2);
    CHECK(ds.test.size() == 2);
    CHECK(!ds.negatives.empty());
    for (const auto& ex : ds.train) {
        CHECK(ex.ann.height_px == doctest::Approx(150.0).epsilon(0.02));
        CHECK(ex.image.width == doctest::Approx(200 * 150.0 / 120).epsilon(0.02));
        for (const auto& j : ex.ann.joints) {
            CHECK(j.pt.x >= 0);
            CHECK(j.pt.x < ex.image.width);
        }
    }

    const Dataset raw = load_dataset((tmp.path / "manifest.json").string(), false);
    CHECK(raw.train[0].ann.height_px == doctest::Approx(120.0));
}

TEST_CASE("out-of-bounds annotations are rejected by the loader") {
    TempDir tmp;
    SynthConfig cfg;
    write_synth_dataset(cfg, 1, tmp.path.string());
    // corrupt the annotation
    auto anns = load_annotations((tmp.path / "annotations.jsonl").string());
    anns[0].joints[0].pt = Vec2(-5, 10);
    write_annotations(anns, (tmp.path / "annotations.jsonl").string());
    CHECK_THROWS_AS(load_dataset((tmp.path / "manifest.json").string()), Error);
}

TEST_CASE("model container round-trips and gates the version") {
    TempDir tmp;
    Rng rng(2);
    const SkeletonTree tree = default_skeleton();

    Model model;
    model.tree = tree;
    model.params.cell_size = 4;
    model.params.feature_dim = 31;
    model.params.symbol_ids.resize(25);
    model.params.filters.resize(25);
    model.symbols.resize(25);
    for (int p = 0; p < 25; ++p) {
        model.symbols[static_cast<size_t>(p)].part_id = p;
        const size_t len = static_cast<size_t>(tree.part(p).box.w) * tree.part(p).box.h * 31;
        for (int s = 0; s < 2; ++s) {
            Symbol sym;
            sym.id = {p, s, 0};
            sym.filter.resize(len);
            for (auto& v : sym.filter) v = rng.uniform(-1, 1);
            sym.svm_bias = rng.uniform(-1, 1);
            sym.detection_count = s + 3;
            model.symbols[static_cast<size_t>(p)].symbols.push_back(sym);
            model.params.symbol_ids[static_cast<size_t>(p)].push_back(sym.id);
            model.params.filters[static_cast<size_t>(p)].push_back(sym.filter);
        }
        // one tombstone per part
        Symbol dead;
        dead.id = {p, 0, 9};
        dead.survived = false;
        model.symbols[static_cast<size_t>(p)].symbols.push_back(dead);
    }
    model.params.context.edges.resize(tree.edges.size());
    Rng crng(3);
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        const auto [pi, ci] = tree.edges[e];
        EdgeContext& ec = model.params.context.edges[e];
        ec.resize(2, 2);
        for (int sp = 0; sp < 2; ++sp)
            for (int sc = 0; sc < 2; ++sc) {
                if (sp == 1 && sc == 1) continue; // keep one absent pair
                ContextEntry& entry = ec.put(sp, sc);
                entry.w = {crng.uniform(-1, 1), crng.uniform(-1, 1), -0.3, -0.6};
                entry.bias = crng.uniform(-1, 1);
                entry.anchor = Vec2(crng.uniform(-4, 4), crng.uniform(-4, 4));
            }
    }
    model.params.root_bias = 0.125;

    const std::string path = (tmp.path / "m.psym").string();
    save_model(model, path);
    CHECK_FALSE(fs::exists(path + ".tmp"));

    const Model back = load_model(path);
    CHECK(back.tree.num_parts() == 25);
    CHECK(back.params.root_bias == 0.125);
    CHECK(flatten_params(back.tree, back.params) == flatten_params(model.tree, model.params));
    CHECK(back.symbols[3].symbols.size() == 3);
    CHECK(back.symbols[3].symbols[2].survived == false);
    CHECK(back.symbols[3].symbols[0].detection_count == 3);

    // version gate
    std::string bytes = slurp(path);
    bytes[4] = 9;
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
    }
    try {
        load_model(path);
        FAIL("expected version mismatch");
    } catch (const Error& e) {
        CHECK(std::string(e.category()) == "model_version_mismatch");
    }
}

TEST_CASE("micro training pipeline is deterministic end to end") {
    TempDir tmp;
    SynthConfig cfg;
    cfg.seed = 77;
    cfg.clutter = 0.1;
    write_synth_dataset(cfg, 6, tmp.path.string());
    const Dataset ds = load_dataset((tmp.path / "manifest.json").string());

    PipelineConfig pc;
    pc.k_large = 1;
    pc.k_small = 1;
    pc.sym_large = 1;
    pc.sym_small = 1;
    pc.cv_rounds = 1;
    pc.learn_epochs = 1;
    pc.negatives_per_part = 40;
    pc.seed = 9;

    const TrainArtifacts a = train_pipeline(ds, pc);
    const TrainArtifacts b = train_pipeline(ds, pc);
    CHECK(flatten_params(a.model.tree, a.model.params) ==
          flatten_params(b.model.tree, b.model.params));

    // saved twice, the files are byte-identical
    const std::string p1 = (tmp.path / "m1.psym").string();
    const std::string p2 = (tmp.path / "m2.psym").string();
    save_model(a.model, p1);
    save_model(b.model, p2);
    CHECK(slurp(p1) == slurp(p2));
}
