#include "qr/wordlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace qr::wordlab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

} // namespace

// ---------------------------------------------------------------------------
// RngStream
// ---------------------------------------------------------------------------

RngStream::RngStream(std::uint64_t seed, std::uint64_t streamIndex)
    : state_(mix64(seed + kGolden) ^ mix64(streamIndex * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL)) {}

std::uint64_t RngStream::nextU64() {
    std::uint64_t z = (state_ += kGolden);
    return mix64(z);
}

double RngStream::uniform01() {
    const std::uint64_t x = nextU64() >> 11; // 53 bits
    return (static_cast<double>(x) + 0.5) * 0x1p-53;
}

std::uint64_t RngStream::boundedInt(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("boundedInt: bound must be positive");
    const std::uint64_t threshold = (-bound) % bound; // = 2^64 mod bound
    for (;;) {
        const std::uint64_t x = nextU64();
        if (x >= threshold) return x % bound;
    }
}

// ---------------------------------------------------------------------------
// Sampling and scanning
// ---------------------------------------------------------------------------

Word sampleWord(long n, const GeomModel& model, RngStream& rng) {
    if (n < 0) throw std::invalid_argument("sampleWord: n must be >= 0");
    const double lnq = std::log(model.q.toDouble());
    Word w;
    w.letters.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const long k = 1 + static_cast<long>(std::floor(std::log(u) / lnq));
        w.letters.push_back(k >= 1 ? k : 1);
    }
    return w;
}

std::vector<RecordEntry> scanRecords(const Word& w) {
    std::vector<RecordEntry> rec;
    long best = 0;
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (w.letters[i] > best) {
            best = w.letters[i];
            rec.push_back(RecordEntry{static_cast<long>(i + 1), best});
        }
    }
    return rec;
}

RecordView rthFromRight(const std::vector<RecordEntry>& records, long r) {
    if (r < 1) throw std::invalid_argument("rthFromRight: r must be >= 1");
    RecordView v;
    const long len = static_cast<long>(records.size());
    if (len < r) return v;
    const RecordEntry& e = records[static_cast<std::size_t>(len - r)];
    v.exists = true;
    v.value = e.value;
    v.leftCount = e.index - 1;
    return v;
}

// ---------------------------------------------------------------------------
// Exact enumeration
// ---------------------------------------------------------------------------

long chooseAlphabetCap(long n, double tol, const GeomModel& model) {
    if (n < 1) throw std::invalid_argument("chooseAlphabetCap: n must be >= 1");
    if (!(tol > 0)) throw std::invalid_argument("chooseAlphabetCap: tol must be positive");
    const double qd = model.q.toDouble();
    const double pd = 1.0 - qd;
    const double arg = tol / (static_cast<double>(n) * (1.0 / pd + static_cast<double>(n)));
    if (arg >= 1.0) return 1;
    const long m = static_cast<long>(std::ceil(std::log(arg) / std::log(qd)));
    return std::max<long>(1, m);
}

namespace {

void validateEnumArgs(long n, long M, long r) {
    if (n < 0 || n > 8) throw std::invalid_argument("enumeration: n must lie in 0..8");
    if (M < 1) throw std::invalid_argument("enumeration: alphabet cap must be >= 1");
    if (r < 1) throw std::invalid_argument("enumeration: r must be >= 1");
}

void fillTailBounds(long n, long M, const GeomModel& model, EnumResult& res) {
    const double qd = model.q.toDouble();
    const double pd = 1.0 - qd;
    const double qM = std::pow(qd, static_cast<double>(M));
    res.tailBoundValue = static_cast<double>(n) * qM * (static_cast<double>(M) + 1.0 / pd);
    res.tailBoundPosition = static_cast<double>(n) * static_cast<double>(n) * qM;
    res.alphabetCap = M;
}

} // namespace

EnumResult enumerateTruncated(long n, long M, long r, const GeomModel& model) {
    validateEnumArgs(n, M, r);
    if (M > 100000) throw std::invalid_argument("enumerateTruncated: alphabet cap budget exceeded");
    const Rat q = model.qExact;
    const Rat p = Rat(1) - q;

    // qpow[e] = q^e for e = 0..M; probLetter[k] = p q^{k-1}.
    std::vector<Rat> qpow(static_cast<std::size_t>(M + 1));
    qpow[0] = 1;
    for (long e = 1; e <= M; ++e) qpow[static_cast<std::size_t>(e)] = qpow[static_cast<std::size_t>(e - 1)] * q;

    // R[s][h] = measure of j-letter suffixes that produce exactly s new
    // records when the running maximum is h (letters restricted to 1..M).
    // At j=0: R[s][h] = [s == 0].
    const long S = r; // track s = 0..r-1
    std::vector<std::vector<Rat>> R(static_cast<std::size_t>(S),
                                    std::vector<Rat>(static_cast<std::size_t>(M + 2)));
    for (long h = 0; h <= M + 1; ++h) R[0][static_cast<std::size_t>(h)] = 1;

    Rat evalue(0), epos(0);
    for (long j = 0; j <= n - 1; ++j) {
        const long i = n - j; // the candidate record position
        // weight of "position i holds a record of value h, exactly r-1 more
        // records follow": (1-q^{h-1})^{i-1} * p q^{h-1} * R[r-1][h]
        for (long h = 1; h <= M; ++h) {
            const Rat& tailWays = R[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(h)];
            if (tailWays == 0) continue;
            Rat prefix(1);
            if (i > 1) {
                const Rat below = Rat(1) - qpow[static_cast<std::size_t>(h - 1)];
                if (below == 0) continue; // h = 1 cannot top a nonempty prefix
                prefix = ratPow(below, i - 1);
            }
            const Rat wgt = prefix * p * qpow[static_cast<std::size_t>(h - 1)] * tailWays;
            evalue += wgt * Rat(h);
            epos += wgt * Rat(i - 1);
        }
        if (j == n - 1) break;
        // Advance R to j+1 letters: R'[s][h] = (1-q^h) R[s][h] + sum_{g>h} p q^{g-1} R[s-1][g].
        std::vector<std::vector<Rat>> next(static_cast<std::size_t>(S),
                                           std::vector<Rat>(static_cast<std::size_t>(M + 2)));
        // suffix[h] for the current s-1 row: sum_{g>=h} p q^{g-1} R[s-1][g]
        std::vector<Rat> suffix(static_cast<std::size_t>(M + 2));
        for (long s = 0; s < S; ++s) {
            if (s >= 1) {
                suffix[static_cast<std::size_t>(M + 1)] = 0;
                for (long g = M; g >= 1; --g)
                    suffix[static_cast<std::size_t>(g)] = suffix[static_cast<std::size_t>(g + 1)]
                        + p * qpow[static_cast<std::size_t>(g - 1)]
                            * R[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(g)];
            }
            for (long h = 1; h <= M; ++h) {
                Rat v = (Rat(1) - qpow[static_cast<std::size_t>(h)])
                      * R[static_cast<std::size_t>(s)][static_cast<std::size_t>(h)];
                if (s >= 1) v += suffix[static_cast<std::size_t>(h + 1)];
                next[static_cast<std::size_t>(s)][static_cast<std::size_t>(h)] = v;
            }
        }
        R = std::move(next);
    }

    EnumResult res;
    res.valueMean = evalue;
    res.leftCountMean = epos;
    fillTailBounds(n, M, model, res);
    return res;
}

EnumResult enumerateTruncatedBrute(long n, long M, long r, const GeomModel& model) {
    validateEnumArgs(n, M, r);
    double budget = 1.0;
    for (long i = 0; i < n; ++i) budget *= static_cast<double>(M);
    if (budget > 1e8) throw std::invalid_argument("enumerateTruncatedBrute: M^n budget exceeded");
    const Rat q = model.qExact;
    const Rat p = Rat(1) - q;
    std::vector<Rat> probLetter(static_cast<std::size_t>(M + 1));
    {
        Rat pl = p;
        for (long k = 1; k <= M; ++k) {
            probLetter[static_cast<std::size_t>(k)] = pl;
            pl *= q;
        }
    }
    Rat evalue(0), epos(0);
    Word w;
    w.letters.assign(static_cast<std::size_t>(n), 1);
    for (;;) {
        Rat prob(1);
        for (long i = 0; i < n; ++i)
            prob *= probLetter[static_cast<std::size_t>(w.letters[static_cast<std::size_t>(i)])];
        const RecordView v = rthFromRight(scanRecords(w), r);
        if (v.exists) {
            evalue += prob * Rat(v.value);
            epos += prob * Rat(v.leftCount);
        }
        // odometer increment
        long pos = n - 1;
        while (pos >= 0 && w.letters[static_cast<std::size_t>(pos)] == M) {
            w.letters[static_cast<std::size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++w.letters[static_cast<std::size_t>(pos)];
    }
    EnumResult res;
    res.valueMean = evalue;
    res.leftCountMean = epos;
    fillTailBounds(n, M, model, res);
    return res;
}

PermEnum permutationEnumerate(long n, long r) {
    if (n < 1 || n > 8) throw std::invalid_argument("permutationEnumerate: n must lie in 1..8");
    if (r < 1) throw std::invalid_argument("permutationEnumerate: r must be >= 1");
    std::vector<long> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    long total = 0, exists = 0;
    long sumPos = 0, sumLeft = 0;
    Word w;
    do {
        ++total;
        w.letters = perm;
        const RecordView v = rthFromRight(scanRecords(w), r);
        if (v.exists) {
            ++exists;
            sumPos += v.leftCount + 1;
            sumLeft += v.leftCount;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    PermEnum out;
    out.positionMeanWithIndicator = Rat(sumPos, total);
    out.leftCountMean = Rat(sumLeft, total);
    out.pExists = Rat(exists, total);
    out.conditionalMean = exists > 0 ? Rat(sumPos, exists) : Rat(0);
    out.positionMeanWithIndicator.canonicalize();
    out.leftCountMean.canonicalize();
    out.pExists.canonicalize();
    out.conditionalMean.canonicalize();
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace {

constexpr long kBlock = 1024;

struct BlockAcc {
    double vSum = 0, vSumSq = 0;
    double lSum = 0, lSumSq = 0;
};

MeanEstimate finalize(double sum, double sumSq, long samples, std::uint64_t seed) {
    MeanEstimate est;
    est.samples = samples;
    est.seed = seed;
    est.mean = sum / static_cast<double>(samples);
    double var = 0.0;
    if (samples > 1) {
        var = (sumSq - static_cast<double>(samples) * est.mean * est.mean)
            / static_cast<double>(samples - 1);
        if (var < 0) var = 0;
    }
    est.halfWidth95 = 1.96 * std::sqrt(var / static_cast<double>(samples));
    return est;
}

} // namespace

McResult monteCarlo(McMode mode, const std::optional<GeomModel>& model, long n, long r,
                    long samples, std::uint64_t seed, int workers) {
    if (samples < 1000) throw std::invalid_argument("monteCarlo: need at least 10^3 samples");
    if (n < 0) throw std::invalid_argument("monteCarlo: n must be >= 0");
    if (r < 1) throw std::invalid_argument("monteCarlo: r must be >= 1");
    if (mode == McMode::geometric && !model)
        throw std::invalid_argument("monteCarlo: geometric mode requires a model");
    if (mode == McMode::permutation && n < 1)
        throw std::invalid_argument("monteCarlo: permutation mode requires n >= 1");
    if (workers < 1) workers = 1;

    const long numBlocks = (samples + kBlock - 1) / kBlock;
    std::vector<BlockAcc> acc(static_cast<std::size_t>(numBlocks));

    auto runBlock = [&](long b) {
        RngStream rng(seed, static_cast<std::uint64_t>(b));
        const long count = std::min<long>(kBlock, samples - b * kBlock);
        BlockAcc a;
        std::vector<long> perm;
        Word w;
        for (long s = 0; s < count; ++s) {
            RecordView v;
            if (mode == McMode::geometric) {
                w = sampleWord(n, *model, rng);
                v = rthFromRight(scanRecords(w), r);
                const double val = v.exists ? static_cast<double>(v.value) : 0.0;
                a.vSum += val;
                a.vSumSq += val * val;
            } else {
                perm.resize(static_cast<std::size_t>(n));
                std::iota(perm.begin(), perm.end(), 1);
                for (long i = n - 1; i >= 1; --i) {
                    const auto j = rng.boundedInt(static_cast<std::uint64_t>(i + 1));
                    std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
                }
                w.letters = perm;
                v = rthFromRight(scanRecords(w), r);
            }
            const double lc = v.exists ? static_cast<double>(v.leftCount) : 0.0;
            a.lSum += lc;
            a.lSumSq += lc * lc;
        }
        acc[static_cast<std::size_t>(b)] = a;
    };

    if (workers == 1 || numBlocks == 1) {
        for (long b = 0; b < numBlocks; ++b) runBlock(b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (long b = t; b < numBlocks; b += workers) runBlock(b);
            });
        for (auto& th : pool) th.join();
    }

    // merge in fixed block order (worker-count invariant)
    double vSum = 0, vSumSq = 0, lSum = 0, lSumSq = 0;
    for (const BlockAcc& a : acc) {
        vSum += a.vSum;
        vSumSq += a.vSumSq;
        lSum += a.lSum;
        lSumSq += a.lSumSq;
    }
    McResult out;
    if (mode == McMode::geometric) out.valueEstimate = finalize(vSum, vSumSq, samples, seed);
    out.leftCountEstimate = finalize(lSum, lSumSq, samples, seed);
    return out;
}

double chiSquareStatistic(const std::vector<long>& counts, const std::vector<double>& expected) {
    if (counts.size() != expected.size() || counts.empty())
        throw std::invalid_argument("chiSquareStatistic: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!(expected[i] > 0)) throw std::invalid_argument("chiSquareStatistic: expected must be positive");
        const double d = static_cast<double>(counts[i]) - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

} // namespace qr::wordlab
