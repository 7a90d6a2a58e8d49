#include "ffmedian/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace ffmedian {

namespace {

// Edmonds' blossom algorithm with primal-dual updates, O(n^3). Vertex and
// blossom ids share one index space: [0, n) vertices, [n, 2n) blossoms.
// Endpoint p of edge k is endpoint[p]; p ^ 1 is the other end.
class BlossomMatcher {
public:
    BlossomMatcher(std::size_t n, const std::vector<std::tuple<long, long, std::int64_t>>& edges)
        : n_(static_cast<long>(n)), edges_(edges) {}

    std::vector<long> run();

private:
    using Weight = std::int64_t;

    long n_;
    const std::vector<std::tuple<long, long, Weight>>& edges_;
    std::vector<long> endpoint_;
    std::vector<std::vector<long>> neighbend_;
    std::vector<long> mate_, label_, labelend_, inblossom_, blossomparent_, blossombase_, bestedge_;
    std::vector<std::vector<long>> blossomchilds_, blossomendps_, blossombestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<long> unusedblossoms_;
    std::vector<Weight> dualvar_;
    std::vector<bool> allowedge_;
    std::vector<long> queue_;

    long ev(long k) const { return std::get<0>(edges_[k]); }
    long ew(long k) const { return std::get<1>(edges_[k]); }
    Weight wt(long k) const { return std::get<2>(edges_[k]); }

    Weight slack(long k) const { return dualvar_[ev(k)] + dualvar_[ew(k)] - 2 * wt(k); }

    void leaves(long b, std::vector<long>& out) const {
        if (b < n_) {
            out.push_back(b);
            return;
        }
        for (long t : blossomchilds_[b]) leaves(t, out);
    }
    std::vector<long> leaves(long b) const {
        std::vector<long> out;
        leaves(b, out);
        return out;
    }

    static long wrap(long j, long size) { return ((j % size) + size) % size; }

    void assign_label(long w, long t, long p);
    long scan_blossom(long v, long w);
    void add_blossom(long base, long k);
    void expand_blossom(long b, bool endstage);
    void augment_blossom(long b, long v);
    void augment_matching(long k);
};

void BlossomMatcher::assign_label(long w, long t, long p) {
    long b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        leaves(b, queue_);
    } else if (t == 2) {
        long base = blossombase_[b];
        assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
}

long BlossomMatcher::scan_blossom(long v, long w) {
    std::vector<long> path;
    long base = -1;
    while (v != -1 || w != -1) {
        long b = inblossom_[v];
        if (label_[b] & 4) {
            base = blossombase_[b];
            break;
        }
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint_[labelend_[b]];
            b = inblossom_[v];
            v = endpoint_[labelend_[b]];
        }
        if (w != -1) std::swap(v, w);
    }
    for (long b : path) label_[b] = 1;
    return base;
}

void BlossomMatcher::add_blossom(long base, long k) {
    long v = ev(k), w = ew(k);
    long bb = inblossom_[base];
    long bv = inblossom_[v];
    long bw = inblossom_[w];
    long b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    auto& path = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        blossomparent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint_[labelend_[bv]];
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        blossomparent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint_[labelend_[bw]];
        bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0;
    for (long leaf : leaves(b)) {
        if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
        inblossom_[leaf] = b;
    }
    std::vector<long> bestedgeto(2 * n_, -1);
    for (long sub : path) {
        std::vector<std::vector<long>> nblists;
        if (!has_bestedges_[sub]) {
            for (long leaf : leaves(sub)) {
                std::vector<long> list;
                for (long p : neighbend_[leaf]) list.push_back(p / 2);
                nblists.push_back(std::move(list));
            }
        } else {
            nblists.push_back(blossombestedges_[sub]);
        }
        for (const auto& nblist : nblists) {
            for (long e : nblist) {
                long i = ev(e), j = ew(e);
                if (inblossom_[j] == b) std::swap(i, j);
                long bj = inblossom_[j];
                if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(e) < slack(bestedgeto[bj])))
                    bestedgeto[bj] = e;
            }
        }
        blossombestedges_[sub].clear();
        has_bestedges_[sub] = false;
        bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (long e : bestedgeto)
        if (e != -1) blossombestedges_[b].push_back(e);
    has_bestedges_[b] = true;
    bestedge_[b] = -1;
    for (long e : blossombestedges_[b])
        if (bestedge_[b] == -1 || slack(e) < slack(bestedge_[b])) bestedge_[b] = e;
}

void BlossomMatcher::expand_blossom(long b, bool endstage) {
    auto childs = blossomchilds_[b];
    for (long s : childs) {
        blossomparent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dualvar_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for (long leaf : leaves(s)) inblossom_[leaf] = s;
        }
    }
    if (!endstage && label_[b] == 2) {
        const auto& endps = blossomendps_[b];
        const long size = static_cast<long>(childs.size());
        long entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
        long j = static_cast<long>(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
        long jstep, endptrick;
        if (j & 1) {
            j -= size;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        long p = labelend_[b];
        while (j != 0) {
            label_[endpoint_[p ^ 1]] = 0;
            label_[endpoint_[endps[wrap(j - endptrick, size)] ^ endptrick ^ 1]] = 0;
            assign_label(endpoint_[p ^ 1], 2, p);
            allowedge_[endps[wrap(j - endptrick, size)] / 2] = true;
            j += jstep;
            p = endps[wrap(j - endptrick, size)] ^ endptrick;
            allowedge_[p / 2] = true;
            j += jstep;
        }
        long bv = childs[wrap(j, size)];
        label_[endpoint_[p ^ 1]] = label_[bv] = 2;
        labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (childs[wrap(j, size)] != entrychild) {
            bv = childs[wrap(j, size)];
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            long found = -1;
            for (long leaf : leaves(bv)) {
                if (label_[leaf] != 0) {
                    found = leaf;
                    break;
                }
            }
            if (found != -1) {
                label_[found] = 0;
                label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                assign_label(found, 2, labelend_[found]);
            }
            j += jstep;
        }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = false;
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
}

void BlossomMatcher::augment_blossom(long b, long v) {
    long t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto& childs = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    const long size = static_cast<long>(childs.size());
    long i = static_cast<long>(std::find(childs.begin(), childs.end(), t) - childs.begin());
    long j = i;
    long jstep, endptrick;
    if (i & 1) {
        j -= size;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = childs[wrap(j, size)];
        long p = endps[wrap(j - endptrick, size)] ^ endptrick;
        if (t >= n_) augment_blossom(t, endpoint_[p]);
        j += jstep;
        t = childs[wrap(j, size)];
        if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
        mate_[endpoint_[p]] = p ^ 1;
        mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase_[b] = blossombase_[childs[0]];
}

void BlossomMatcher::augment_matching(long k) {
    const std::pair<long, long> starts[2] = {{ev(k), 2 * k + 1}, {ew(k), 2 * k}};
    for (auto [s, p] : starts) {
        while (true) {
            long bs = inblossom_[s];
            if (bs >= n_) augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1) break;
            long t = endpoint_[labelend_[bs]];
            long bt = inblossom_[t];
            s = endpoint_[labelend_[bt]];
            long j = endpoint_[labelend_[bt] ^ 1];
            if (bt >= n_) augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<long> BlossomMatcher::run() {
    const long nedge = static_cast<long>(edges_.size());
    if (nedge == 0) return std::vector<long>(n_, -1);
    Weight maxweight = 0;
    for (long k = 0; k < nedge; ++k) maxweight = std::max(maxweight, wt(k));
    endpoint_.resize(2 * nedge);
    for (long p = 0; p < 2 * nedge; ++p) endpoint_[p] = p % 2 == 0 ? ev(p / 2) : ew(p / 2);
    neighbend_.assign(n_, {});
    for (long k = 0; k < nedge; ++k) {
        neighbend_[ev(k)].push_back(2 * k + 1);
        neighbend_[ew(k)].push_back(2 * k);
    }
    mate_.assign(n_, -1);
    label_.assign(2 * n_, 0);
    labelend_.assign(2 * n_, -1);
    inblossom_.resize(n_);
    for (long v = 0; v < n_; ++v) inblossom_[v] = v;
    blossomparent_.assign(2 * n_, -1);
    blossomchilds_.assign(2 * n_, {});
    blossombase_.assign(2 * n_, -1);
    for (long v = 0; v < n_; ++v) blossombase_[v] = v;
    blossomendps_.assign(2 * n_, {});
    bestedge_.assign(2 * n_, -1);
    blossombestedges_.assign(2 * n_, {});
    has_bestedges_.assign(2 * n_, false);
    unusedblossoms_.clear();
    for (long b = n_; b < 2 * n_; ++b) unusedblossoms_.push_back(b);
    dualvar_.assign(2 * n_, 0);
    for (long v = 0; v < n_; ++v) dualvar_[v] = maxweight;
    allowedge_.assign(nedge, false);

    for (long stage = 0; stage < n_; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (long b = n_; b < 2 * n_; ++b) {
            blossombestedges_[b].clear();
            has_bestedges_[b] = false;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), false);
        queue_.clear();
        for (long v = 0; v < n_; ++v)
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                long v = queue_.back();
                queue_.pop_back();
                for (long p : neighbend_[v]) {
                    long k = p / 2;
                    long w = endpoint_[p];
                    if (inblossom_[v] == inblossom_[w]) continue;
                    Weight kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) allowedge_[k] = true;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            long base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        long b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                    }
                }
            }
            if (augmented) break;

            int deltatype = 1;
            Weight delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n_);
            long deltaedge = -1, deltablossom = -1;
            for (long v = 0; v < n_; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    Weight d = slack(bestedge_[v]);
                    if (d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (long b = 0; b < 2 * n_; ++b) {
                if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    Weight d = slack(bestedge_[b]) / 2;
                    if (d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (long b = n_; b < 2 * n_; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 && dualvar_[b] < delta) {
                    delta = dualvar_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            for (long v = 0; v < n_; ++v) {
                if (label_[inblossom_[v]] == 1)
                    dualvar_[v] -= delta;
                else if (label_[inblossom_[v]] == 2)
                    dualvar_[v] += delta;
            }
            for (long b = n_; b < 2 * n_; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                    if (label_[b] == 1)
                        dualvar_[b] += delta;
                    else if (label_[b] == 2)
                        dualvar_[b] -= delta;
                }
            }
            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge_[deltaedge] = true;
                long i = ev(deltaedge), j = ew(deltaedge);
                if (label_[inblossom_[i]] == 0) std::swap(i, j);
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = true;
                queue_.push_back(ev(deltaedge));
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) break;
        for (long b = n_; b < 2 * n_; ++b)
            if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0)
                expand_blossom(b, true);
    }
    std::vector<long> result(n_, -1);
    for (long v = 0; v < n_; ++v)
        if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
    return result;
}

constexpr double weight_scale = 2199023255552.0;  // 2^41

}  // namespace

std::vector<long> max_weight_matching(std::size_t vertex_count,
                                      const std::vector<std::tuple<long, long, std::int64_t>>& edges) {
    return BlossomMatcher(vertex_count, edges).run();
}

std::vector<std::size_t> mwm(const MatchGraph& graph) {
    // best parallel edge per vertex pair
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> best;
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& e = graph.edges[k];
        if (e.u == e.v || !(e.weight > 0.0)) continue;
        auto key = std::minmax(e.u, e.v);
        auto [it, inserted] = best.emplace(key, k);
        if (!inserted && e.weight > graph.edges[it->second].weight) it->second = k;
    }
    std::vector<std::tuple<long, long, std::int64_t>> scaled;
    std::vector<std::size_t> origin;
    for (auto [key, k] : best) {
        auto w = static_cast<std::int64_t>(std::llround(graph.edges[k].weight * weight_scale));
        if (w <= 0) continue;
        scaled.emplace_back(key.first, key.second, 2 * w);  // even weights keep duals integral
        origin.push_back(k);
    }
    auto mate = max_weight_matching(graph.vertex_count, scaled);
    std::vector<std::size_t> chosen;
    for (std::size_t e = 0; e < scaled.size(); ++e) {
        auto u = std::get<0>(scaled[e]);
        auto v = std::get<1>(scaled[e]);
        if (mate[u] == v) chosen.push_back(origin[e]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

double matching_weight(const MatchGraph& graph, const std::vector<std::size_t>& chosen) {
    double total = 0.0;
    for (auto k : chosen) total += graph.edges[k].weight;
    return total;
}

}  // namespace ffmedian
