#include "esd/geoment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esd {

namespace {

struct BlockTables {
    std::vector<std::int64_t> bdim;       // local dimension per block
    std::vector<std::vector<int>> digit;  // digit[x][b]: local index of block b
};

BlockTables make_tables(const SubsystemLayout& layout, const Partition& p) {
    BlockTables t;
    const int K = p.block_count();
    t.bdim.assign(static_cast<std::size_t>(K), 1);
    for (int b = 0; b < K; ++b)
        for (int i : p.block(b)) t.bdim[static_cast<std::size_t>(b)] *= layout.dim_of(i);
    const std::int64_t d = layout.dim();
    t.digit.assign(static_cast<std::size_t>(d), std::vector<int>(static_cast<std::size_t>(K), 0));
    for (std::int64_t x = 0; x < d; ++x)
        for (int b = 0; b < K; ++b) {
            std::int64_t loc = 0;
            for (int i : p.block(b)) loc = loc * layout.dim_of(i) + layout.digit(x, i);
            t.digit[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)] =
                static_cast<int>(loc);
        }
    return t;
}

double product_overlap(const VectorXcd& psi, const BlockTables& t,
                       const std::vector<VectorXcd>& v) {
    cplx s(0.0, 0.0);
    const int K = static_cast<int>(v.size());
    for (std::int64_t x = 0; x < psi.size(); ++x) {
        cplx prod = psi(x);
        for (int b = 0; b < K; ++b)
            prod *= std::conj(
                v[static_cast<std::size_t>(b)](t.digit[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)]));
        s += prod;
    }
    return std::abs(s);
}

struct RunOut {
    double lam = 0.0;
    std::vector<VectorXcd> factors;
    int sweeps = 0;
    bool converged = false;
};

RunOut run_alternating(const VectorXcd& psi, const BlockTables& t,
                       std::vector<VectorXcd> v, const GEOptions& opts,
                       std::mt19937_64& rng) {
    const int K = static_cast<int>(v.size());
    for (auto& f : v) f.normalize();
    double prev = product_overlap(psi, t, v);
    RunOut out;
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double o = prev;
        for (int b = 0; b < K; ++b) {
            VectorXcd w = VectorXcd::Zero(t.bdim[static_cast<std::size_t>(b)]);
            for (std::int64_t x = 0; x < psi.size(); ++x) {
                cplx coeff = psi(x);
                for (int b2 = 0; b2 < K; ++b2) {
                    if (b2 == b) continue;
                    coeff *= std::conj(v[static_cast<std::size_t>(b2)](
                        t.digit[static_cast<std::size_t>(x)][static_cast<std::size_t>(b2)]));
                }
                w(t.digit[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)]) += coeff;
            }
            const double nw = w.norm();
            if (nw < 1e-300) {
                // psi is orthogonal to the other factors' product; restart
                // this factor at random and keep going
                v[static_cast<std::size_t>(b)] = gaussian_vector(w.size(), rng).normalized();
                continue;
            }
            // each block update maximizes the overlap over that factor, so
            // it can never decrease
            if (nw < o - 1e-12)
                throw std::runtime_error("alternating overlap decreased");
            v[static_cast<std::size_t>(b)] = w / nw;
            o = nw;
        }
        out.sweeps = sweep;
        if (o - prev < opts.tolerance) {
            out.converged = true;
            prev = o;
            break;
        }
        prev = o;
    }
    out.lam = prev;
    out.factors = std::move(v);
    return out;
}

GEResult best_over_inits(const PureState& psi, const Partition& partition,
                         const GEOptions& opts,
                         const std::vector<std::vector<VectorXcd>>& warm_inits) {
    if (partition.subsystem_count() != psi.layout().count())
        throw std::invalid_argument("partition does not match layout");
    if (opts.restarts < 1 || opts.max_sweeps < 1 || !(opts.tolerance > 0.0))
        throw std::invalid_argument("invalid geometric-entanglement options");
    const BlockTables t = make_tables(psi.layout(), partition);
    const int K = partition.block_count();
    RunOut best;
    bool have = false;
    auto consider = [&](RunOut r) {
        if (!have || r.lam > best.lam) {
            best = std::move(r);
            have = true;
        }
    };
    for (std::size_t w = 0; w < warm_inits.size(); ++w) {
        std::mt19937_64 rng(mix_seed(opts.seed, 0x77a3000ULL + w));
        consider(run_alternating(psi.amp(), t, warm_inits[w], opts, rng));
    }
    for (int r = 0; r < opts.restarts; ++r) {
        std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(r)));
        std::vector<VectorXcd> v;
        v.reserve(static_cast<std::size_t>(K));
        for (int b = 0; b < K; ++b)
            v.push_back(gaussian_vector(t.bdim[static_cast<std::size_t>(b)], rng));
        consider(run_alternating(psi.amp(), t, std::move(v), opts, rng));
    }
    return GEResult{best.lam * best.lam, 1.0 - best.lam * best.lam, partition,
                    std::move(best.factors), best.sweeps, best.converged};
}

// factor set for the partition that merges blocks i and j of the winner,
// preserving the winner's overlap exactly
std::pair<Partition, std::vector<VectorXcd>> merge_blocks(
    const SubsystemLayout& layout, const GEResult& fine, int i, int j) {
    const auto& blocks = fine.partition.blocks();
    std::vector<int> merged = blocks[static_cast<std::size_t>(i)];
    merged.insert(merged.end(), blocks[static_cast<std::size_t>(j)].begin(),
                  blocks[static_cast<std::size_t>(j)].end());
    std::sort(merged.begin(), merged.end());
    // merged factor, indexed row-major over the merged members
    std::int64_t md = 1;
    for (int m : merged) md *= layout.dim_of(m);
    VectorXcd g(md);
    for (std::int64_t z = 0; z < md; ++z) {
        std::int64_t rem = z;
        std::vector<int> dig(merged.size());
        for (int p = static_cast<int>(merged.size()) - 1; p >= 0; --p) {
            dig[static_cast<std::size_t>(p)] =
                static_cast<int>(rem % layout.dim_of(merged[static_cast<std::size_t>(p)]));
            rem /= layout.dim_of(merged[static_cast<std::size_t>(p)]);
        }
        auto local = [&](const std::vector<int>& members) {
            std::int64_t loc = 0;
            for (int m : members) {
                const auto pos = static_cast<std::size_t>(
                    std::lower_bound(merged.begin(), merged.end(), m) - merged.begin());
                loc = loc * layout.dim_of(m) + dig[pos];
            }
            return loc;
        };
        g(z) = fine.factors[static_cast<std::size_t>(i)](local(blocks[static_cast<std::size_t>(i)])) *
               fine.factors[static_cast<std::size_t>(j)](local(blocks[static_cast<std::size_t>(j)]));
    }
    std::vector<std::pair<std::vector<int>, VectorXcd>> named;
    named.emplace_back(merged, std::move(g));
    for (int b = 0; b < fine.partition.block_count(); ++b) {
        if (b == i || b == j) continue;
        named.emplace_back(blocks[static_cast<std::size_t>(b)],
                           fine.factors[static_cast<std::size_t>(b)]);
    }
    std::vector<std::vector<int>> pb;
    pb.reserve(named.size());
    for (const auto& nb : named) pb.push_back(nb.first);
    Partition coarser(pb, layout.count());
    std::vector<VectorXcd> factors;
    for (const auto& blk : coarser.blocks())
        for (auto& nb : named)
            if (nb.first == blk) factors.push_back(nb.second);
    return {std::move(coarser), std::move(factors)};
}

}  // namespace

GEResult best_product_overlap(const PureState& psi, const Partition& partition,
                              const GEOptions& opts) {
    return best_over_inits(psi, partition, opts, {});
}

GEResult relative_ge(const PureState& psi, const Partition& partition,
                     const GEOptions& opts) {
    return best_over_inits(psi, partition, opts, {});
}

GEResult absolute_ge(const PureState& psi, int K, const GEOptions& opts) {
    const auto partitions = enumerate_partitions(psi.layout().count(), K);
    GEResult* best = nullptr;
    std::vector<GEResult> all;
    all.reserve(partitions.size());
    for (const auto& p : partitions) {
        all.push_back(best_over_inits(psi, p, opts, {}));
        if (!best || all.back().lambda_sq > best->lambda_sq) best = &all.back();
    }
    return *best;
}

HierarchyReport hierarchy(const PureState& psi, const GEOptions& opts) {
    const int n = psi.layout().count();
    if (n < 2) throw std::invalid_argument("hierarchy needs >= 2 subsystems");
    std::vector<HierarchyLevel> levels;  // built finest first
    for (int K = n; K >= 2; --K) {
        const auto partitions = enumerate_partitions(n, K);
        // one warm start per partition, from merging two blocks of the
        // finer level's winner; this pins lambda(K) >= lambda(K+1)
        std::vector<std::vector<std::vector<VectorXcd>>> warms(partitions.size());
        if (!levels.empty()) {
            const GEResult& fine = levels.back().best;
            for (int i = 0; i < fine.partition.block_count(); ++i)
                for (int j = i + 1; j < fine.partition.block_count(); ++j) {
                    auto [coarser, factors] = merge_blocks(psi.layout(), fine, i, j);
                    for (std::size_t p = 0; p < partitions.size(); ++p)
                        if (partitions[p] == coarser)
                            warms[p].push_back(std::move(factors));
                }
        }
        HierarchyLevel level{K, GEResult{0, 0, partitions[0], {}, 0, false}, {}};
        level.per_partition.reserve(partitions.size());
        for (std::size_t p = 0; p < partitions.size(); ++p) {
            level.per_partition.push_back(
                best_over_inits(psi, partitions[p], opts, warms[p]));
            const auto& r = level.per_partition.back();
            if (level.per_partition.size() == 1 ||
                r.lambda_sq > level.best.lambda_sq)
                level.best = r;
        }
        levels.push_back(std::move(level));
    }
    HierarchyReport rep;
    rep.monotone = true;
    rep.all_converged = true;
    std::reverse(levels.begin(), levels.end());  // ascending K
    for (const auto& lv : levels) {
        rep.absolute_energies.push_back(lv.best.energy);
        rep.all_converged = rep.all_converged && lv.best.converged;
    }
    for (std::size_t i = 0; i + 1 < rep.absolute_energies.size(); ++i) {
        rep.differences.push_back(rep.absolute_energies[i + 1] -
                                  rep.absolute_energies[i]);
        if (rep.differences.back() < -1e-6) rep.monotone = false;
    }
    rep.levels = std::move(levels);
    return rep;
}

}  // namespace esd
