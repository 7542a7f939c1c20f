#pragma once

#include "qr/qkernel.hpp"
#include "qr/rational.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qr::wordlab {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Word {
    std::vector<long> letters; // 1-based alphabet, letters[i] >= 1
};

struct RecordEntry {
    long index = 0; // 1-based position in the word
    long value = 0;
};

struct RecordView {
    bool exists = false;
    long value = 0;     // 0 when !exists
    long leftCount = 0; // elements strictly to the record's left; 0 when !exists
};

struct MeanEstimate {
    double mean = 0.0;
    double halfWidth95 = 0.0; // 1.96 * sampleStdDev / sqrt(samples)
    long samples = 0;
    std::uint64_t seed = 0;
};

struct EnumResult {
    Rat valueMean;              // E[value * indicator] over {1..M}^n, exact
    Rat leftCountMean;          // E[leftCount * indicator], exact
    double tailBoundValue = 0;  // n q^M (M + 1/p)
    double tailBoundPosition = 0; // n^2 q^M
    long alphabetCap = 0;
};

struct PermEnum {
    Rat positionMeanWithIndicator; // E[(leftCount+1) * indicator]
    Rat conditionalMean;           // E[position | record exists] (0 when pExists = 0)
    Rat pExists;
    Rat leftCountMean;             // E[leftCount * indicator]
};

struct McResult {
    std::optional<MeanEstimate> valueEstimate; // absent in permutation mode
    MeanEstimate leftCountEstimate;
};

enum class McMode { geometric, permutation };

// ---------------------------------------------------------------------------
// RNG: splittable counter-mix stream, deterministic per (seed, streamIndex)
// ---------------------------------------------------------------------------

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t streamIndex);

    std::uint64_t nextU64();
    double uniform01();                    // strictly inside (0,1)
    std::uint64_t boundedInt(std::uint64_t bound); // uniform on [0, bound), unbiased

  private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Sampling and scanning
// ---------------------------------------------------------------------------

// n i.i.d. geometric letters via CDF inversion k = 1 + floor(ln U / ln q).
Word sampleWord(long n, const GeomModel& model, RngStream& rng);

// Strict left-to-right records: every new strict maximum, 1-based indices.
std::vector<RecordEntry> scanRecords(const Word& w);

// The r-th record counted from the right; exists=false when there are
// fewer than r records (statistics then contribute 0).
RecordView rthFromRight(const std::vector<RecordEntry>& records, long r);

// ---------------------------------------------------------------------------
// Exact enumeration oracles
// ---------------------------------------------------------------------------

// Alphabet cap M making the truncation tail of both statistics <= tol.
long chooseAlphabetCap(long n, double tol, const GeomModel& model);

// Exact rational sum over all words in {1..M}^n of prod p q^{a_i - 1} times
// the statistic, via a suffix DP over (remaining letters, running max,
// records still to appear).  n <= 8.
EnumResult enumerateTruncated(long n, long M, long r, const GeomModel& model);

// Same quantity by literal iteration over all M^n words (M^n <= 10^8).
EnumResult enumerateTruncatedBrute(long n, long M, long r, const GeomModel& model);

// Exhaustive enumeration over all n! permutations (n <= 8), 1-based positions.
PermEnum permutationEnumerate(long n, long r);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

// Independent replications with the indicator-zero convention; permutation
// mode carries no value statistic.  Results are bit-identical for a fixed
// seed regardless of `workers`: samples are drawn in fixed 1024-sample
// blocks, block b from stream (seed, b), partials merged in block order.
McResult monteCarlo(McMode mode, const std::optional<GeomModel>& model, long n, long r,
                    long samples, std::uint64_t seed, int workers = 1);

// Pearson chi-square statistic for observed counts vs expected counts.
double chiSquareStatistic(const std::vector<long>& counts, const std::vector<double>& expected);

} // namespace qr::wordlab
