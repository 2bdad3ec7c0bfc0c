#include "virolbi/projection.hpp"

#include <numeric>
#include <stdexcept>

namespace virolbi {

SupportSet SupportSet::from_gamma(const EdgeVector& gamma) {
    const int m = gamma.edge_count();
    SupportSet s;
    s.member.assign(m, 0);
    if (gamma.channels == 1) {
        for (int e = 0; e < m; ++e)
            if (gamma.values[e] != 0.0) {
                s.member[e] = 1;
                ++s.nonzero_count;
            }
    } else {
        for (int e = 0; e < m; ++e) {
            for (int c = 0; c < gamma.channels; ++c)
                if (gamma.values[static_cast<std::size_t>(c) * m + e] != 0.0) {
                    s.member[e] = 1;
                    ++s.nonzero_count;
                    break;
                }
        }
    }
    return s;
}

ComponentPartition find_components(const LatticeGraph& g, const SupportSet& s) {
    const int p = g.pixel_count();
    if (s.edge_count() != g.edge_count())
        throw std::invalid_argument("find_components: support does not match lattice");

    std::vector<std::int32_t> parent(p);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::int32_t> size(p, 1);

    auto find = [&](std::int32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];  // path halving
            a = parent[a];
        }
        return a;
    };

    const std::size_t m = g.edges.size();
    for (std::size_t e = 0; e < m; ++e) {
        if (s.member[e]) continue;
        std::int32_t ra = find(g.edges[e].first);
        std::int32_t rb = find(g.edges[e].second);
        if (ra == rb) continue;
        if (size[ra] < size[rb]) std::swap(ra, rb);
        parent[rb] = ra;
        size[ra] += size[rb];
    }

    ComponentPartition part;
    part.component_id.assign(p, -1);
    std::vector<std::int32_t> label(p, -1);
    for (int i = 0; i < p; ++i) {
        const std::int32_t r = find(i);
        if (label[r] < 0) {
            label[r] = part.component_count++;
            part.component_size.push_back(size[r]);
        }
        part.component_id[i] = label[r];
    }
    return part;
}

void project(std::span<const double> u, int channels, const ComponentPartition& part,
             std::span<double> out) {
    const std::size_t p = part.component_id.size();
    if (channels < 1 || u.size() != p * channels || out.size() != p * channels)
        throw std::invalid_argument("project: dimension mismatch");
    std::vector<double> mean(part.component_count);
    std::vector<double> first(part.component_count);
    std::vector<std::uint8_t> seen(part.component_count);
    std::vector<std::uint8_t> uniform(part.component_count);
    for (int c = 0; c < channels; ++c) {
        const double* uc = u.data() + c * p;
        double* oc = out.data() + c * p;
        std::fill(mean.begin(), mean.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t i = 0; i < p; ++i) {
            const std::int32_t k = part.component_id[i];
            mean[k] += uc[i];
            if (!seen[k]) {
                seen[k] = 1;
                first[k] = uc[i];
                uniform[k] = 1;
            } else if (uc[i] != first[k]) {
                uniform[k] = 0;
            }
        }
        // An already-constant component keeps its value bitwise, so the
        // projection is exactly idempotent.
        for (std::int32_t k = 0; k < part.component_count; ++k)
            mean[k] = uniform[k] ? first[k] : mean[k] / part.component_size[k];
        for (std::size_t i = 0; i < p; ++i) oc[i] = mean[part.component_id[i]];
    }
}

std::vector<double> project(std::span<const double> u, int channels,
                            const ComponentPartition& part) {
    std::vector<double> out(u.size());
    project(u, channels, part, out);
    return out;
}

ImagePlane project(const ImagePlane& u, const ComponentPartition& part) {
    ImagePlane out(u.height, u.width);
    project(u.pixels, 1, part, out.pixels);
    return out;
}

ColorImage project(const ColorImage& u, const ComponentPartition& part) {
    ColorImage out;
    for (int c = 0; c < 3; ++c) {
        out.channels[c] = ImagePlane(u.channels[c].height, u.channels[c].width);
        project(u.channels[c].pixels, 1, part, out.channels[c].pixels);
    }
    return out;
}

double sparsity_level(const SupportSet& s) {
    if (s.member.empty()) return 0.0;
    return static_cast<double>(s.nonzero_count) / static_cast<double>(s.member.size());
}

}  // namespace virolbi
