#pragma once

// Fixture helpers shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "livetl/core.hpp"
#include "livetl/ingest.hpp"

namespace testsupport {

using livetl::Minute;

inline livetl::Timeline timeline(Minute start, const std::vector<std::optional<std::string>>& texts) {
  livetl::Timeline tl;
  tl.start_minute = start;
  for (std::size_t k = 0; k < texts.size(); ++k) {
    tl.entries.push_back({start + static_cast<Minute>(k), texts[k]});
  }
  return tl;
}

inline livetl::Tweet tweet(std::string id, Minute minute, std::string text) {
  return {std::move(id), minute, text, text};
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "livetl-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream(p, std::ios::binary) << body;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Random dataset with a dense reference over [0, minutes) and tweets spread
/// over [-pad, minutes - 1 + pad]. Tweet text encodes its own minute so
/// window checks need no lookup table.
inline livetl::MatchDataset random_dataset(std::mt19937_64& rng, int minutes, int pad,
                                           double present_p = 0.4, int min_per_minute = 0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> per_minute(min_per_minute, 3);
  livetl::MatchDataset d;
  d.match_id = "fixture";
  std::vector<livetl::Update> ups;
  for (Minute m = 0; m < minutes; ++m) {
    if (unit(rng) < present_p) ups.push_back({m, fmt::format("ref {}", m)});
    else ups.push_back(livetl::Update::absent(m));
  }
  d.reference = livetl::Timeline::from_updates(std::move(ups));
  int serial = 0;
  for (Minute m = -pad; m < minutes + pad; ++m) {
    const int n = per_minute(rng);
    for (int k = 0; k < n; ++k) {
      d.tweets.push_back(tweet(fmt::format("{:06}", serial++), m, fmt::format("at {}", m)));
    }
  }
  std::sort(d.tweets.begin(), d.tweets.end(), livetl::tweet_order);
  return d;
}

}  // namespace testsupport
