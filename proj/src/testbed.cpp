#include "pooltest/testbed.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pooltest/errors.hpp"
#include "pooltest/kernels.hpp"
#include "pooltest/text.hpp"
#include "pooltest/theory.hpp"

namespace pooltest {

std::vector<std::uint32_t> PopulationState::infected_indices() const {
  std::vector<std::uint32_t> idx;
  idx.reserve(infected_count);
  for (std::uint32_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const int b = __builtin_ctzll(bits);
      idx.push_back(w * 64 + static_cast<std::uint32_t>(b));
      bits &= bits - 1;
    }
  }
  return idx;
}

PopulationState generate_population(std::uint32_t n, double f, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("population size must be >= 1");
  theory::validate_prevalence(f);
  PopulationState pop;
  pop.n = n;
  pop.f = f;
  pop.seed = seed;
  pop.words.resize((static_cast<std::size_t>(n) + 63) / 64);
  // infection probability quantized to threshold / 2^52
  const auto threshold = static_cast<std::uint64_t>(f * 0x1.0p52);
  kernels::bernoulli_fill(pop.words, n, seed, threshold);
  pop.infected_count = static_cast<std::uint32_t>(kernels::popcount_words(pop.words));
  return pop;
}

void write_population(std::ostream& out, const PopulationState& pop) {
  out << pop.n << ',' << text::format_double(pop.f) << ',' << pop.seed << ','
      << pop.infected_count << '\n';
  bool first = true;
  for (auto i : pop.infected_indices()) {
    if (!first) out << ',';
    out << i;
    first = false;
  }
  out << '\n';
}

PopulationState read_population(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("population file: missing header");
  std::vector<std::string_view> fields;
  std::string_view h = header;
  while (true) {
    const auto pos = h.find(',');
    fields.push_back(h.substr(0, pos));
    if (pos == std::string_view::npos) break;
    h.remove_prefix(pos + 1);
  }
  if (fields.size() != 4) {
    throw ParseError("population file: header must be n,f,seed,infected_count");
  }
  PopulationState pop;
  pop.n = static_cast<std::uint32_t>(text::parse_u64(fields[0], "population header"));
  pop.f = text::parse_double(fields[1], "population header");
  pop.seed = text::parse_u64(fields[2], "population header");
  const auto count = text::parse_u64(fields[3], "population header");
  pop.words.assign((static_cast<std::size_t>(pop.n) + 63) / 64, 0);

  std::string line;
  std::getline(in, line);
  std::uint32_t seen = 0;
  std::string_view rest = text::trim(line);
  std::int64_t prev = -1;
  while (!rest.empty()) {
    const auto pos = rest.find(',');
    const auto tok = rest.substr(0, pos);
    const auto idx = text::parse_u64(tok, "population indices");
    if (idx >= pop.n) throw ParseError("population file: index out of range");
    if (static_cast<std::int64_t>(idx) <= prev) {
      throw ParseError("population file: indices must be strictly ascending");
    }
    prev = static_cast<std::int64_t>(idx);
    pop.words[idx >> 6] |= std::uint64_t{1} << (idx & 63);
    ++seen;
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  if (seen != count) {
    throw ParseError("population file: infected_count disagrees with index list");
  }
  pop.infected_count = seen;
  return pop;
}

void TestLedger::begin_stage(std::string_view label) {
  if (!stages_.empty() && stages_.back().first == label) return;
  stages_.emplace_back(std::string(label), 0);
}

void TestLedger::record(std::uint64_t count) {
  if (stages_.empty()) stages_.emplace_back("tests", 0);
  stages_.back().second += count;
  total_ += count;
}

void TestLedger::merge(const TestLedger& other) {
  for (const auto& [label, count] : other.stages_) {
    bool found = false;
    for (auto& [mine, c] : stages_) {
      if (mine == label) {
        c += count;
        found = true;
        break;
      }
    }
    if (!found) stages_.emplace_back(label, count);
    total_ += count;
  }
}

bool pooled_test(const PopulationState& pop, std::span<const std::uint32_t> members,
                 const TestModel& model, TestLedger& ledger, Rng& rng) {
  if (members.empty()) {
    throw std::invalid_argument("pooled_test: empty member set");
  }
  bool hot = false;
  for (const auto s : members) {
    if (s >= pop.n) {
      throw std::invalid_argument("pooled_test: subject index out of range");
    }
    hot = hot || pop.infected(s);
  }
  ledger.record();
  if (model.perfect()) return hot;
  const double u = rng.uniform();
  return hot ? (u >= model.fn_rate) : (u < model.fp_rate);
}

}  // namespace pooltest
