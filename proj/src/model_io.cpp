#include "pose/model_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "pose/error.hpp"

namespace pose {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

class Writer {
public:
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void append(const std::string& s) { buf_.append(s); }
    const std::string& bytes() const { return buf_; }

private:
    void raw(const void* p, size_t n) { buf_.append(static_cast<const char*>(p), n); }
    std::string buf_;
};

class Reader {
public:
    Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

    std::uint8_t u8() { return get<std::uint8_t>(); }
    std::uint16_t u16() { return get<std::uint16_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    std::int32_t i32() { return get<std::int32_t>(); }
    double f64() { return get<double>(); }
    size_t offset() const { return off_; }
    void seek(size_t off) { off_ = off; }
    size_t size() const { return data_.size(); }

private:
    template <typename T>
    T get() {
        if (off_ + sizeof(T) > data_.size())
            fail("io_error", "truncated model file: " + path_);
        T v;
        std::memcpy(&v, data_.data() + off_, sizeof(T));
        off_ += sizeof(T);
        return v;
    }

    const std::string& data_;
    std::string path_;
    size_t off_ = 0;
};

enum SectionId : std::uint32_t {
    kMeta = 1,
    kTree = 2,
    kSymbols = 3,
    kFilters = 4,
    kContext = 5,
};

void append_section(Writer& out, std::uint32_t id, const Writer& payload) {
    out.u32(id);
    out.u64(payload.bytes().size());
    out.append(payload.bytes());
}

} // namespace

void save_model(const Model& model, const std::string& path) {
    model.tree.validate();
    model.params.validate(model.tree);

    Writer out;
    out.u8('P');
    out.u8('S');
    out.u8('Y');
    out.u8('M');
    out.u32(kModelVersion);

    {
        Writer meta;
        meta.u32(static_cast<std::uint32_t>(model.params.cell_size));
        meta.u32(static_cast<std::uint32_t>(model.params.feature_dim));
        meta.f64(model.params.root_bias);
        append_section(out, kMeta, meta);
    }
    {
        Writer tree;
        tree.u32(static_cast<std::uint32_t>(model.tree.num_parts()));
        for (const PartDef& p : model.tree.parts) {
            tree.i32(p.part_id);
            tree.u8(static_cast<std::uint8_t>(p.level));
            tree.u16(static_cast<std::uint16_t>(p.box.w));
            tree.u16(static_cast<std::uint16_t>(p.box.h));
            tree.u8(static_cast<std::uint8_t>(p.constituent_joints.size()));
            for (int j : p.constituent_joints) tree.u8(static_cast<std::uint8_t>(j));
            tree.u8(static_cast<std::uint8_t>(p.name.size()));
            for (char c : p.name) tree.u8(static_cast<std::uint8_t>(c));
        }
        tree.u32(static_cast<std::uint32_t>(model.tree.edges.size()));
        for (const auto& [a, b] : model.tree.edges) {
            tree.i32(a);
            tree.i32(b);
        }
        tree.i32(model.tree.root_id);
        append_section(out, kTree, tree);
    }
    {
        Writer sym;
        for (const SymbolSet& set : model.symbols) {
            sym.u32(static_cast<std::uint32_t>(set.symbols.size()));
            for (const Symbol& s : set.symbols) {
                sym.u16(static_cast<std::uint16_t>(s.id.geometric_type));
                sym.u16(static_cast<std::uint16_t>(s.id.visual_category));
                sym.u8(s.survived ? 1 : 0);
                sym.u32(static_cast<std::uint32_t>(s.detection_count));
                sym.f64(s.svm_bias);
            }
        }
        append_section(out, kSymbols, sym);
    }
    {
        Writer filt;
        for (const auto& per_part : model.params.filters) {
            filt.u32(static_cast<std::uint32_t>(per_part.size()));
            for (const auto& f : per_part) {
                filt.u64(f.size());
                for (double v : f) filt.f64(v);
            }
        }
        append_section(out, kFilters, filt);
    }
    {
        Writer ctx;
        for (const EdgeContext& ec : model.params.context.edges) {
            ctx.u32(static_cast<std::uint32_t>(ec.parent_symbols));
            ctx.u32(static_cast<std::uint32_t>(ec.child_symbols));
            for (int sp = 0; sp < ec.parent_symbols; ++sp) {
                for (int sc = 0; sc < ec.child_symbols; ++sc) {
                    const ContextEntry* e = ec.find(sp, sc);
                    ctx.u8(e ? 1 : 0);
                    if (!e) continue;
                    for (double v : e->w) ctx.f64(v);
                    ctx.f64(e->bias);
                    ctx.f64(e->anchor.x);
                    ctx.f64(e->anchor.y);
                }
            }
        }
        append_section(out, kContext, ctx);
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail("io_error", "cannot write model: " + path);
        f.write(out.bytes().data(), static_cast<std::streamsize>(out.bytes().size()));
        if (!f) fail("io_error", "short write: " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail("io_error", "rename failed for " + path + ": " + ec.message());
}

Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("io_error", "cannot open model: " + path);
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader in(data, path);

    if (in.size() < 8 || data.compare(0, 4, "PSYM") != 0)
        fail("io_error", "not a model file: " + path);
    in.seek(4);
    const std::uint32_t version = in.u32();
    if (version != kModelVersion)
        fail("model_version_mismatch", "model version " + std::to_string(version) +
                                           ", expected " + std::to_string(kModelVersion));

    Model model;
    auto expect_section = [&](std::uint32_t id) {
        const std::uint32_t got = in.u32();
        if (got != id)
            fail("io_error", "unexpected section " + std::to_string(got) + " in " + path);
        return in.u64(); // payload length, consumed implicitly
    };

    expect_section(kMeta);
    model.params.cell_size = static_cast<int>(in.u32());
    model.params.feature_dim = static_cast<int>(in.u32());
    model.params.root_bias = in.f64();

    expect_section(kTree);
    {
        const std::uint32_t n = in.u32();
        model.tree.parts.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            PartDef& p = model.tree.parts[i];
            p.part_id = in.i32();
            p.level = static_cast<PartLevel>(in.u8());
            p.box.w = in.u16();
            p.box.h = in.u16();
            const int nj = in.u8();
            p.constituent_joints.resize(static_cast<size_t>(nj));
            for (int j = 0; j < nj; ++j) p.constituent_joints[static_cast<size_t>(j)] = in.u8();
            const int name_len = in.u8();
            p.name.resize(static_cast<size_t>(name_len));
            for (int c = 0; c < name_len; ++c) p.name[static_cast<size_t>(c)] = static_cast<char>(in.u8());
        }
        const std::uint32_t ne = in.u32();
        model.tree.edges.resize(ne);
        for (std::uint32_t e = 0; e < ne; ++e) {
            model.tree.edges[e].first = in.i32();
            model.tree.edges[e].second = in.i32();
        }
        model.tree.root_id = in.i32();
        model.tree.validate();
    }

    expect_section(kSymbols);
    {
        model.symbols.resize(static_cast<size_t>(model.tree.num_parts()));
        model.params.symbol_ids.resize(static_cast<size_t>(model.tree.num_parts()));
        for (int p = 0; p < model.tree.num_parts(); ++p) {
            SymbolSet& set = model.symbols[static_cast<size_t>(p)];
            set.part_id = p;
            const std::uint32_t n = in.u32();
            set.symbols.resize(n);
            for (std::uint32_t s = 0; s < n; ++s) {
                Symbol& sym = set.symbols[s];
                sym.id.part_id = p;
                sym.id.geometric_type = in.u16();
                sym.id.visual_category = in.u16();
                sym.survived = in.u8() != 0;
                sym.detection_count = static_cast<int>(in.u32());
                sym.svm_bias = in.f64();
                if (sym.survived)
                    model.params.symbol_ids[static_cast<size_t>(p)].push_back(sym.id);
            }
        }
    }

    expect_section(kFilters);
    {
        model.params.filters.resize(static_cast<size_t>(model.tree.num_parts()));
        for (int p = 0; p < model.tree.num_parts(); ++p) {
            const std::uint32_t n = in.u32();
            if (n != model.params.symbol_ids[static_cast<size_t>(p)].size())
                fail("io_error", "filter count does not match surviving symbols in " + path);
            auto& fs = model.params.filters[static_cast<size_t>(p)];
            fs.resize(n);
            for (std::uint32_t s = 0; s < n; ++s) {
                const std::uint64_t len = in.u64();
                fs[s].resize(len);
                for (std::uint64_t i = 0; i < len; ++i) fs[s][i] = in.f64();
            }
        }
    }

    expect_section(kContext);
    {
        model.params.context.edges.resize(model.tree.edges.size());
        for (size_t e = 0; e < model.tree.edges.size(); ++e) {
            EdgeContext& ec = model.params.context.edges[e];
            const int ps = static_cast<int>(in.u32());
            const int cs = static_cast<int>(in.u32());
            ec.resize(ps, cs);
            for (int sp = 0; sp < ps; ++sp) {
                for (int sc = 0; sc < cs; ++sc) {
                    if (in.u8() == 0) continue;
                    ContextEntry& entry = ec.put(sp, sc);
                    for (double& v : entry.w) v = in.f64();
                    entry.bias = in.f64();
                    entry.anchor.x = in.f64();
                    entry.anchor.y = in.f64();
                }
            }
        }
    }

    model.params.validate(model.tree);
    return model;
}

} // namespace pose
