#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "virolbi/lattice.hpp"

namespace virolbi {

// S = supp(gamma): per-edge membership flags. For color, an edge belongs to
// the support iff its 3-channel gamma group is nonzero.
struct SupportSet {
    std::vector<std::uint8_t> member;
    int nonzero_count = 0;

    int edge_count() const { return static_cast<int>(member.size()); }
    static SupportSet from_gamma(const EdgeVector& gamma);
};

// Partition of pixels into the connected components of the complement
// subgraph G = (V, E_{S^c}). Component ids are deterministic: the smallest
// pixel index in a component is its representative, and ids are assigned
// in ascending representative order.
struct ComponentPartition {
    std::vector<std::int32_t> component_id;
    std::int32_t component_count = 0;
    std::vector<std::int32_t> component_size;
};

// Single union-find pass over complement edges, O(p*alpha(p)).
ComponentPartition find_components(const LatticeGraph& g, const SupportSet& s);

// Euclidean projection onto {v : D_{S^c} v = 0}: every pixel of a component
// is replaced by the component mean (per channel for multichannel input).
void project(std::span<const double> u, int channels, const ComponentPartition& part,
             std::span<double> out);
std::vector<double> project(std::span<const double> u, int channels,
                            const ComponentPartition& part);
ImagePlane project(const ImagePlane& u, const ComponentPartition& part);
ColorImage project(const ColorImage& u, const ComponentPartition& part);

// Fraction of supported edges (nonzero groups / edge_count); 0 for an
// edgeless lattice.
double sparsity_level(const SupportSet& s);

}  // namespace virolbi
