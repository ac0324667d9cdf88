#pragma once

#include "critnum/subgroup.hpp"
#include "critnum/subset.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Spanning certificates for subsets of C_pq, built by following the coset
// argument: split S along the subgroup H of index p, pick a coefficient
// vector per target coset, then fill the fiber inside that coset.
namespace critnum::tracer {

/// A per-target failure of the coset argument. Never expected inside the
/// prime window; surfacing one means a hypothesis or the argument is wrong.
class TheoremContradiction : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Block
{
    Element rep = 0;        ///< smallest member
    std::uint32_t coset = 0; ///< image of rep in G/H = Z/p
    GroupSubset members;
};

struct CosetDecomposition
{
    GroupPtr group;
    Subgroup h;
    std::uint32_t p = 0; ///< (G : H)
    GroupSubset set;
    GroupSubset s0; ///< set restricted to H
    /// Sizes >= 3 (descending), then singletons, then pairs.
    std::vector<Block> blocks{};
    std::uint32_t t = 0, r = 0, u = 0;

    std::uint32_t s() const { return static_cast<std::uint32_t>(blocks.size()); }
    std::uint32_t block_size(std::size_t i) const { return static_cast<std::uint32_t>(blocks.at(i).members.size()); }
};

/// Groups S \ H by coset. Requires (G : H) prime and 0 not in S.
CosetDecomposition coset_decompose(const GroupSubset & set, const Subgroup & h);

/// C = sum of (|S_i| - 1) over i with f_i in {0, |S_i|}. Throws std::out_of_range
/// on a wrong-length vector or f_i outside [0, |S_i|].
std::uint32_t collapse_of(const CosetDecomposition & dec, std::span<const std::uint32_t> f);

enum class Variant
{
    lemma_4_3, ///< A_i = {k a_i + H : 1 <= k <= |S_i|-1}
    lemma_4_7, ///< as 4.3 but A_1 = {k a_1 + H : 2 <= k <= |S_1|-2}
};

enum class Route
{
    lemma_4_2, ///< restricted-sum search over the t large blocks, f in {1,2}
    lemma_4_3,
    lemma_4_7,
};

std::string_view to_string(Variant v);
std::string_view to_string(Route r);

/// Sets in the quotient Z/p. a_sets covers blocks 1..t+r; D covers the u pair blocks.
struct ConstructionSets
{
    Variant variant = Variant::lemma_4_3;
    GroupPtr quotient;
    std::vector<GroupSubset> a_sets;
    GroupSubset d;
    /// a_coeff[i][c]: coefficient f_i that realizes class c from A_i, or -1.
    std::vector<std::vector<int>> a_coeff{};
    /// d_choice[c]: 0 if c = b0, j if c = b0 - b_j (1-based pair index), else -1.
    std::vector<int> d_choice{};
    Element b0 = 0;
};

ConstructionSets build_construction_sets(const CosetDecomposition & dec, Variant variant);

/// True if each A_i (i <= t) is an AP with difference a_i + H; these
/// differences are nonzero and pairwise distinct by construction.
bool hypothesis_feed_ok(const CosetDecomposition & dec, const ConstructionSets & cs);

/// Stricter: the full difference sets {d != 0 : A_i is an AP with difference d}
/// of A_1..A_t are pairwise disjoint. Fails whenever two blocks sit in cosets
/// c and -c, or an A_i is all of Z/p or Z/p minus a point.
bool hypothesis_feed_disjoint(const CosetDecomposition & dec, const ConstructionSets & cs);

struct CoverChoice
{
    Element d = 0;              ///< chosen element of D
    std::vector<Element> a;     ///< chosen element of each A_i
};

struct CoverResult
{
    bool covers = false;
    std::vector<Element> missed;                      ///< classes not in D + sum A_i
    std::vector<std::optional<CoverChoice>> choices;  ///< per class, when reachable
};

/// D + A_1 + ... + A_{t+r} in Z/p, with one decomposition per reachable class.
CoverResult quotient_cover_check(const ConstructionSets & cs, std::uint32_t p);

struct Representation
{
    Element x = 0;
    std::vector<std::uint32_t> f;
    std::uint32_t collapse = 0;
    Route route = Route::lemma_4_3;
};

/// Coefficients f with sum f_i (a_i + H) = x + H, sum f_i > 0 and collapse at
/// most max_collapse. Lemma 4.2 route when t >= floor(2 sqrt(p-2)) and the
/// 4.3 variant is requested. Throws TheoremContradiction if none exists.
Representation find_representation(const CosetDecomposition & dec, Element x, std::uint32_t max_collapse,
                                   Variant variant = Variant::lemma_4_3);

/// (Sigma(S_0) u {0}) + Sigma_{f_1}(S_1) + ... + Sigma_{f_s}(S_s). Throws
/// std::logic_error if a partial fold leaves its predicted coset.
GroupSubset fiber_cover(const CosetDecomposition & dec, const Representation & rep);

enum class CertCase
{
    prop_4_1,
    prop_4_5,
    prop_4_6,
    prop_4_8,
    direct_dp,
};

std::string_view to_string(CertCase c);
std::optional<CertCase> parse_cert_case(std::string_view s);

struct Trace
{
    Representation rep;
    std::uint32_t fiber_size = 0;
    /// (p+q-2) + max{1, |S_0|-1} - C - s >= q
    bool lemma_4_4_holds = false;
};

struct SpanCertificate
{
    GroupPtr group;
    std::uint32_t p = 0, q = 0;
    GroupSubset set;
    CertCase case_label = CertCase::direct_dp;
    std::vector<std::vector<Element>> witnesses{}; ///< witnesses[x] sums to x
    std::vector<std::optional<Trace>> traces{};  ///< indexed by x, when a representation was used
    std::uint32_t max_collapse_seen = 0;
    std::uint32_t lemma_4_4_implication_failures = 0; ///< inequality held, fiber < q
};

struct CertifyOptions
{
    /// Keep the p+q-2 smallest elements when S is larger.
    bool truncate = false;
};

/// |G| = pq for primes p < q in the window p + floor(2 sqrt(p-2)) + 1 < q < 2p.
struct WindowPrimes
{
    std::uint32_t p = 0, q = 0;
};
std::optional<WindowPrimes> window_primes(const Group & g);

/// Certificate that S spans a window group C_pq via the case analysis.
/// Throws std::invalid_argument on precondition failures and
/// TheoremContradiction on a target the argument cannot reach.
SpanCertificate certify_span(const GroupSubset & set, const CertifyOptions & opt = {});

/// Certificate from plain subset-sum closure. Works in any group; throws
/// TheoremContradiction naming the first unreachable element.
SpanCertificate certify_direct(const GroupSubset & set);

struct Verdict
{
    bool ok = true;
    std::vector<std::string> failures;
};

/// Re-checks a certificate without trusting how it was produced.
Verdict validate_certificate(const SpanCertificate & cert);

struct CertificateFile
{
    std::vector<SpanCertificate> certificates;
};

void write_certificates(std::ostream & os, const std::vector<SpanCertificate> & certs);
/// Throws std::runtime_error with a line number on malformed input.
CertificateFile read_certificates(std::istream & is);

} // namespace critnum::tracer
