#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "robustbid/conference.hpp"
#include "robustbid/corpus.hpp"
#include "robustbid/rng.hpp"
#include "robustbid/sparse.hpp"

namespace testsupport {

// Unique scratch directory, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    std::string tmpl = (base / "robustbid_test_XXXXXX").string();
    char* raw = ::mkdtemp(tmpl.data());
    if (!raw) throw std::runtime_error("mkdtemp failed");
    path_ = raw;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Random sparse feature matrix with rows = m*n, one row per (reviewer,
// paper) pair. Every row gets at least one entry so no pair is invisible to
// the model.
inline robustbid::CsrMatrix random_features(robustbid::Rng& rng, int m, int n, int d,
                                            int max_nnz = 4, double scale = 1.0) {
  robustbid::CsrMatrix X(m * n, d);
  for (int row = 0; row < m * n; ++row) {
    const int nnz = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nnz)));
    std::vector<int> cols = rng.sample_without_replacement(d, nnz);
    std::sort(cols.begin(), cols.end());
    std::vector<std::pair<int, double>> entries;
    entries.reserve(cols.size());
    for (int c : cols) {
      double v = (rng.real01() * 2.0 - 1.0) * scale;
      if (v == 0.0) v = 0.5 * scale;
      entries.emplace_back(c, v);
    }
    X.append_row(entries);
  }
  return X;
}

// Random sparse bid matrix over {1,2,3}.
inline robustbid::BidMatrix random_bids(robustbid::Rng& rng, int m, int n,
                                        double density = 0.5) {
  robustbid::BidMatrix bids(m, n);
  for (int r = 0; r < m; ++r) {
    std::vector<std::pair<int, int>> row;
    for (int p = 0; p < n; ++p)
      if (rng.real01() < density)
        row.emplace_back(p, 1 + static_cast<int>(rng.below(3)));
    bids.set_row(r, std::move(row));
  }
  return bids;
}

// Minimal well-formed corpus line.
inline std::string paper_line(const std::string& id, const std::string& title,
                              const std::string& abstract_text,
                              const std::vector<std::string>& authors,
                              const std::vector<std::string>& cites, int year = 2019) {
  std::string out = "{\"paper_id\":\"" + id + "\",\"title\":\"" + title +
                    "\",\"abstract\":\"" + abstract_text +
                    "\",\"venue\":\"v\",\"year\":" + std::to_string(year) +
                    ",\"author_ids\":[";
  for (std::size_t i = 0; i < authors.size(); ++i)
    out += (i ? ",\"" : "\"") + authors[i] + "\"";
  out += "],\"out_citations\":[";
  for (std::size_t i = 0; i < cites.size(); ++i)
    out += (i ? ",\"" : "\"") + cites[i] + "\"";
  out += "]}";
  return out;
}

}  // namespace testsupport
