#include "pooltest/groupcode.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "pooltest/errors.hpp"
#include "pooltest/kernels.hpp"
#include "pooltest/text.hpp"
#include "pooltest/theory.hpp"

namespace pooltest {
namespace {

// C(n, r) saturating far above any population size we care about.
std::uint64_t choose_saturating(std::uint64_t n, std::uint64_t r) {
  constexpr std::uint64_t kCap = std::numeric_limits<std::uint64_t>::max() / 2;
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    result = result * (n - r + i) / i;
    if (result > kCap) return kCap;
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t signature_hash(std::span<const std::uint32_t> sig) {
  std::uint64_t h = 0x9AE16A3B2F90404FULL;
  for (const auto g : sig) h = mix64(h ^ (g + kGolden));
  return h;
}

}  // namespace

PoolingDesign build_design(std::uint32_t n, double f, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("design needs at least one subject");
  const int m = theory::rounded_pool_size(f);
  const int k = theory::rounded_redundancy(f);

  PoolingDesign design;
  design.n = n;
  design.k = k;
  design.seed = seed;
  const auto ng = static_cast<std::uint64_t>(
      std::max<long long>(k, std::llround(static_cast<double>(n) * k / m)));
  if (choose_saturating(ng, k) < n) {
    throw InfeasibleDesign("cannot assign unique signatures: C(" + std::to_string(ng) +
                           ", " + std::to_string(k) + ") < " + std::to_string(n));
  }
  design.n_groups = static_cast<std::uint32_t>(ng);
  design.groups.assign(design.n_groups, {});
  design.signatures.resize(static_cast<std::size_t>(n) * k);

  // Deal group ids from a shuffled deck; a full pass over the deck loads
  // every group once, so loads stay within one of each other.  Probing skips
  // ids already in the current signature and resolves signature collisions.
  Rng rng(seed);
  std::vector<std::uint32_t> deck(design.n_groups);
  std::iota(deck.begin(), deck.end(), 0u);
  rng.shuffle(std::span<std::uint32_t>(deck));
  std::size_t pos = 0;

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(n * 2);
  std::vector<std::uint32_t> sig(k);
  std::vector<std::size_t> slots(k);
  std::vector<std::uint32_t> canon(k);

  const auto in_sig = [&](std::uint32_t g, int filled) {
    for (int j = 0; j < filled; ++j) {
      if (sig[j] == g) return true;
    }
    return false;
  };
  // first deck index at or after pos whose group is not yet in the signature
  const auto probe = [&](int filled) -> std::size_t {
    for (std::size_t j = pos; j < deck.size(); ++j) {
      if (!in_sig(deck[j], filled)) return j;
    }
    return deck.size();
  };

  for (std::uint32_t s = 0; s < n; ++s) {
    for (int j = 0; j < k; ++j) {
      std::size_t hit;
      while (true) {
        if (pos == deck.size()) {
          rng.shuffle(std::span<std::uint32_t>(deck));
          pos = 0;
        }
        hit = probe(j);
        if (hit != deck.size()) break;
        rng.shuffle(std::span<std::uint32_t>(deck));
        pos = 0;
      }
      std::swap(deck[pos], deck[hit]);
      sig[j] = deck[pos];
      slots[j] = pos;
      ++pos;
    }
    canon.assign(sig.begin(), sig.end());
    std::sort(canon.begin(), canon.end());

    // On a collision, swap the most recent pick for the next candidate in the
    // deck; the displaced group goes back where the candidate came from.
    std::uint64_t guard = 0;
    const std::uint64_t guard_limit = 2 * static_cast<std::uint64_t>(design.n_groups) + 16;
    while (seen.count(signature_hash(canon)) > 0) {
      if (++guard > guard_limit) {
        // Tight design: every completion of the current prefix is taken.
        // Feasibility (C(n_groups, k) >= n) guarantees some combination is
        // still free; take the lexicographically first.  Balance yields to
        // uniqueness on this path.
        std::vector<std::uint32_t> combo(k);
        for (int j = 0; j < k; ++j) combo[j] = static_cast<std::uint32_t>(j);
        while (seen.count(signature_hash(combo)) > 0) {
          int j = k - 1;
          while (j >= 0 && combo[j] == design.n_groups - static_cast<std::uint32_t>(k - j)) {
            --j;
          }
          if (j < 0) throw InfeasibleDesign("no unused signature left");
          ++combo[j];
          for (int i = j + 1; i < k; ++i) combo[i] = combo[i - 1] + 1;
        }
        canon = combo;
        break;
      }
      std::size_t hit;
      while (true) {
        if (pos == deck.size()) {
          rng.shuffle(std::span<std::uint32_t>(deck));
          pos = 0;
        }
        hit = probe(k);
        if (hit != deck.size()) break;
        rng.shuffle(std::span<std::uint32_t>(deck));
        pos = 0;
      }
      const std::uint32_t incoming = deck[hit];
      deck[hit] = sig[k - 1];
      deck[slots[k - 1]] = incoming;
      sig[k - 1] = incoming;
      canon.assign(sig.begin(), sig.end());
      std::sort(canon.begin(), canon.end());
    }
    seen.insert(signature_hash(canon));

    std::copy(canon.begin(), canon.end(),
              design.signatures.begin() + static_cast<std::size_t>(s) * k);
    for (const auto g : canon) design.groups[g].push_back(s);
  }
  return design;
}

void validate_design(const PoolingDesign& design) {
  if (design.groups.size() != design.n_groups) {
    throw std::logic_error("design: group count mismatch");
  }
  std::vector<int> degree(design.n, 0);
  std::size_t min_size = std::numeric_limits<std::size_t>::max();
  std::size_t max_size = 0;
  std::size_t total = 0;
  for (const auto& members : design.groups) {
    min_size = std::min(min_size, members.size());
    max_size = std::max(max_size, members.size());
    total += members.size();
    for (const auto s : members) {
      if (s >= design.n) throw std::logic_error("design: member out of range");
      ++degree[s];
    }
  }
  for (const auto d : degree) {
    if (d != design.k) throw std::logic_error("design: subject degree != k");
  }
  if (total != static_cast<std::size_t>(design.n) * design.k) {
    throw std::logic_error("design: membership total != n*k");
  }
  if (design.n_groups > static_cast<std::uint32_t>(design.k) && max_size - min_size > 1) {
    throw std::logic_error("design: group sizes differ by more than one");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(design.n * 2);
  for (std::uint32_t s = 0; s < design.n; ++s) {
    const auto sig = design.signature(s);
    if (!std::is_sorted(sig.begin(), sig.end())) {
      throw std::logic_error("design: signature not sorted");
    }
    if (!seen.insert(signature_hash(sig)).second) {
      throw std::logic_error("design: duplicate signature");
    }
  }
}

std::vector<std::uint8_t> first_pass(const PopulationState& pop,
                                     const PoolingDesign& design,
                                     const TestModel& model, TestLedger& ledger,
                                     Rng& rng) {
  ledger.begin_stage("first-pass");
  std::vector<std::uint8_t> results(design.n_groups, 0);
  for (std::uint32_t g = 0; g < design.n_groups; ++g) {
    results[g] = pooled_test(pop, design.groups[g], model, ledger, rng) ? 1 : 0;
  }
  return results;
}

std::vector<std::uint32_t> decode(const PoolingDesign& design,
                                  std::span<const std::uint8_t> results) {
  if (results.size() != design.n_groups) {
    throw std::invalid_argument("decode: results length != n_groups");
  }
  std::vector<std::uint8_t> padded(results.size() + kernels::kResultsPadding, 0);
  std::copy(results.begin(), results.end(), padded.begin());
  std::vector<std::uint8_t> flags(design.n);
  kernels::all_groups_positive(design.signatures, design.k, padded, flags);
  std::vector<std::uint32_t> positives;
  for (std::uint32_t s = 0; s < design.n; ++s) {
    if (flags[s]) positives.push_back(s);
  }
  return positives;
}

std::vector<std::uint32_t> decode_bruteforce_oracle(
    const PoolingDesign& design, std::span<const std::uint32_t> infected) {
  std::vector<std::uint8_t> hot(design.n, 0);
  for (const auto s : infected) hot[s] = 1;
  std::vector<std::uint8_t> group_positive(design.n_groups, 0);
  for (std::uint32_t g = 0; g < design.n_groups; ++g) {
    for (const auto s : design.groups[g]) {
      if (hot[s]) {
        group_positive[g] = 1;
        break;
      }
    }
  }
  std::vector<std::uint32_t> positives;
  for (std::uint32_t s = 0; s < design.n; ++s) {
    bool member_anywhere = false;
    bool all_positive = true;
    for (std::uint32_t g = 0; g < design.n_groups; ++g) {
      const auto& members = design.groups[g];
      if (std::binary_search(members.begin(), members.end(), s)) {
        member_anywhere = true;
        if (!group_positive[g]) {
          all_positive = false;
          break;
        }
      }
    }
    if (member_anywhere && all_positive) positives.push_back(s);
  }
  return positives;
}

std::vector<std::uint32_t> retest_pass(const PopulationState& pop,
                                       std::span<const std::uint32_t> candidates,
                                       const TestModel& model, TestLedger& ledger,
                                       Rng& rng) {
  ledger.begin_stage("retest");
  std::vector<std::uint32_t> confirmed;
  for (const auto s : candidates) {
    if (pooled_test(pop, {&s, 1}, model, ledger, rng)) confirmed.push_back(s);
  }
  return confirmed;
}

DecodeResult run_group_coding(const PopulationState& pop, const PoolingDesign& design,
                              const TestModel& model, Rng& rng, bool with_retest) {
  DecodeResult result;
  const auto group_results = first_pass(pop, design, model, result.ledger, rng);
  result.first_pass_positives = decode(design, group_results);
  if (with_retest) {
    result.confirmed_positives =
        retest_pass(pop, result.first_pass_positives, model, result.ledger, rng);
  }
  return result;
}

void write_design(std::ostream& out, const PoolingDesign& design) {
  out << "n=" << design.n << '\n';
  out << "n_groups=" << design.n_groups << '\n';
  out << "k=" << design.k << '\n';
  out << "seed=" << design.seed << '\n';
  for (std::uint32_t g = 0; g < design.n_groups; ++g) {
    out << g << ':';
    const auto& members = design.groups[g];
    for (std::size_t i = 0; i < members.size(); ++i) {
      out << (i == 0 ? " " : ", ") << members[i];
    }
    out << '\n';
  }
}

PoolingDesign read_design(std::istream& in) {
  PoolingDesign design;
  std::string line;
  const auto header = [&](const char* key) -> std::uint64_t {
    if (!std::getline(in, line)) throw ParseError("design file: truncated header");
    const auto eq = line.find('=');
    if (eq == std::string::npos || text::trim(line.substr(0, eq)) != key) {
      throw ParseError(std::string("design file: expected '") + key + "=' line");
    }
    return text::parse_u64(line.substr(eq + 1), "design header");
  };
  design.n = static_cast<std::uint32_t>(header("n"));
  design.n_groups = static_cast<std::uint32_t>(header("n_groups"));
  design.k = static_cast<int>(header("k"));
  design.seed = header("seed");
  if (design.n < 1 || design.n_groups < 1 || design.k < 1) {
    throw ParseError("design file: n, n_groups and k must be positive");
  }
  design.groups.assign(design.n_groups, {});
  design.signatures.assign(static_cast<std::size_t>(design.n) * design.k,
                           std::numeric_limits<std::uint32_t>::max());
  std::vector<int> degree(design.n, 0);
  while (std::getline(in, line)) {
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto colon = trimmed.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("design file: group record missing ':'");
    }
    const auto gid = text::parse_u64(trimmed.substr(0, colon), "design group id");
    if (gid >= design.n_groups) {
      throw ParseError("design file: group id " + std::to_string(gid) + " out of range");
    }
    auto& members = design.groups[gid];
    if (!members.empty()) {
      throw ParseError("design file: duplicate record for group " + std::to_string(gid));
    }
    std::string_view rest = trimmed.substr(colon + 1);
    while (!text::trim(rest).empty()) {
      const auto comma = rest.find(',');
      const auto tok = rest.substr(0, comma);
      const auto s = text::parse_u64(tok, "design member list");
      if (s >= design.n) {
        throw ParseError("design file: subject id " + std::to_string(s) + " out of range");
      }
      if (degree[s] >= design.k) {
        throw ParseError("design file: subject " + std::to_string(s) +
                         " appears in more than k groups");
      }
      design.signatures[s * design.k + degree[s]] = static_cast<std::uint32_t>(gid);
      ++degree[s];
      members.push_back(static_cast<std::uint32_t>(s));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!std::is_sorted(members.begin(), members.end())) {
      std::sort(members.begin(), members.end());
    }
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
      throw ParseError("design file: duplicate subject in group " + std::to_string(gid));
    }
  }
  for (std::uint32_t s = 0; s < design.n; ++s) {
    if (degree[s] != design.k) {
      throw ParseError("design file: subject " + std::to_string(s) +
                       " appears in " + std::to_string(degree[s]) + " groups, expected " +
                       std::to_string(design.k));
    }
    auto* sig = design.signatures.data() + static_cast<std::size_t>(s) * design.k;
    std::sort(sig, sig + design.k);
  }
  return design;
}

void write_results(std::ostream& out, std::span<const std::uint8_t> results) {
  for (std::size_t g = 0; g < results.size(); ++g) {
    out << g << ',' << (results[g] ? 1 : 0) << '\n';
  }
}

std::vector<std::uint8_t> read_results(std::istream& in, std::uint32_t n_groups) {
  std::vector<std::uint8_t> results(n_groups, 0);
  std::vector<std::uint8_t> present(n_groups, 0);
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto comma = trimmed.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("results file: expected 'group_id,0|1'");
    }
    const auto gid = text::parse_u64(trimmed.substr(0, comma), "results group id");
    if (gid >= n_groups) {
      throw DataMismatch("results file: unknown group id " + std::to_string(gid));
    }
    if (present[gid]) {
      throw DataMismatch("results file: duplicate group id " + std::to_string(gid));
    }
    const auto val = text::trim(trimmed.substr(comma + 1));
    if (val != "0" && val != "1") {
      throw ParseError("results file: result for group " + std::to_string(gid) +
                       " must be 0 or 1");
    }
    present[gid] = 1;
    results[gid] = (val == "1") ? 1 : 0;
  }
  for (std::uint32_t g = 0; g < n_groups; ++g) {
    if (!present[g]) {
      throw DataMismatch("results file: missing group id " + std::to_string(g));
    }
  }
  return results;
}

void write_positives(std::ostream& out, std::span<const std::uint32_t> subjects,
                     std::string_view flag) {
  for (const auto s : subjects) {
    out << s << ',' << flag << '\n';
  }
}

}  // namespace pooltest
