#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pose/params.hpp"
#include "pose/skeleton.hpp"
#include "pose/symbols.hpp"

namespace pose {

struct Model {
    SkeletonTree tree;
    std::vector<SymbolSet> symbols; // per part, including pruned tombstones
    ModelParams params;
};

// Container format (all integers and floats little-endian, floats are f64):
//   magic "PSYM" | version u32 |
//   sections, each: id u32 | payload length u64 | payload
//     1 meta:    cell_size u32, feature_dim u32, root_bias f64
//     2 tree:    parts (id i32, level u8, box u16 u16, joints u8 n + bytes),
//                edges u32 n + (i32, i32) pairs, root i32
//     3 symbols: per part: u32 n, then per symbol geometric_type u16,
//                visual_category u16, survived u8, detection_count u32,
//                svm_bias f64
//     4 filters: per part, per surviving symbol: u64 len + f64 values
//     5 context: per edge: u32 parent_syms, u32 child_syms, then per pair
//                present u8 and, when present, w f64[4], bias f64, anchor f64[2]
constexpr std::uint32_t kModelVersion = 1;

void save_model(const Model& model, const std::string& path); // atomic (tmp + rename)
Model load_model(const std::string& path); // Error("model_version_mismatch") on version skew

} // namespace pose
