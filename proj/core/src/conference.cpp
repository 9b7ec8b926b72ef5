#include "robustbid/conference.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/hashing.hpp"

namespace robustbid {

using nlohmann::json;
namespace fs = std::filesystem;

BidMatrix::BidMatrix(int m, int n, const std::vector<Bid>& bids) : m_(m), n_(n), rows_(m) {
  for (const auto& b : bids) {
    if (b.reviewer < 0 || b.reviewer >= m || b.paper < 0 || b.paper >= n)
      throw ParseError("bid (" + std::to_string(b.reviewer) + "," +
                       std::to_string(b.paper) + ") out of range");
    rows_[b.reviewer].emplace_back(b.paper, b.value);
  }
  for (int r = 0; r < m; ++r) {
    auto& row = rows_[r];
    std::sort(row.begin(), row.end());
    int prev = -1;
    for (const auto& [p, v] : row) {
      if (p == prev)
        throw ParseError("duplicate bid for reviewer " + std::to_string(r) +
                         ", paper " + std::to_string(p));
      if (v < 1 || v > 3)
        throw ParseError("bid value " + std::to_string(v) + " outside {1,2,3}");
      prev = p;
    }
  }
}

void BidMatrix::set_row(int r, std::vector<std::pair<int, int>> entries) {
  int prev = -1;
  for (const auto& [p, v] : entries) {
    if (p <= prev) throw ParseError("bid row not strictly increasing");
    if (p < 0 || p >= n_) throw ParseError("bid paper index out of range");
    if (v < 1 || v > 3) throw ParseError("bid value outside {1,2,3}");
    prev = p;
  }
  rows_[r] = std::move(entries);
}

int BidMatrix::value_at(int r, int p) const {
  const auto& row = rows_[r];
  auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(p, 0));
  return (it != row.end() && it->first == p) ? it->second : 0;
}

std::size_t BidMatrix::total_positive() const {
  std::size_t t = 0;
  for (const auto& row : rows_) t += row.size();
  return t;
}

std::vector<Bid> BidMatrix::to_triplets() const {
  std::vector<Bid> out;
  out.reserve(total_positive());
  for (int r = 0; r < m_; ++r)
    for (const auto& [p, v] : rows_[r]) out.push_back({r, p, v});
  return out;
}

std::vector<double> BidMatrix::to_labels() const {
  std::vector<double> y(static_cast<std::size_t>(m_) * n_, 0.0);
  for (int r = 0; r < m_; ++r)
    for (const auto& [p, v] : rows_[r]) y[static_cast<std::size_t>(r) * n_ + p] = v;
  return y;
}

Conference::Conference(std::vector<PaperRecord> papers,
                       std::vector<ReviewerRecord> reviewers,
                       std::vector<std::vector<int>> paper_subjects, int n_clusters,
                       std::vector<double> tpms, BidMatrix bids, ConferenceMeta meta)
    : papers_(std::move(papers)),
      reviewers_(std::move(reviewers)),
      paper_subjects_(std::move(paper_subjects)),
      n_clusters_(n_clusters),
      tpms_(std::move(tpms)),
      bids_(std::move(bids)),
      meta_(std::move(meta)) {
  // Canonical parameter order, so equality and round trips are stable.
  std::sort(meta_.params.begin(), meta_.params.end());
  for (const auto& [k, v] : meta_.params)
    if (k == "n_clusters")
      throw ParseError("meta parameter name n_clusters is reserved");
  validate();
  for (int p = 0; p < n(); ++p) paper_index_[papers_[p].paper_id] = p;
  for (int r = 0; r < m(); ++r) reviewer_index_[reviewers_[r].reviewer_id] = r;
}

void Conference::validate() const {
  // Dense indices are defined as positions in sorted-id order; enforce it so
  // every on-disk index stays meaningful.
  for (std::size_t i = 1; i < papers_.size(); ++i)
    if (papers_[i - 1].paper_id >= papers_[i].paper_id)
      throw ParseError("conference papers not in sorted unique id order");
  for (std::size_t i = 1; i < reviewers_.size(); ++i)
    if (reviewers_[i - 1].reviewer_id >= reviewers_[i].reviewer_id)
      throw ParseError("conference reviewers not in sorted unique id order");
  if (paper_subjects_.size() != papers_.size())
    throw ParseError("paper subject table size mismatch");
  auto check_subjects = [&](const std::vector<int>& subj, const std::string& what) {
    if (subj.size() > 5) throw ParseError(what + ": more than 5 subjects");
    std::vector<int> seen;
    for (int c : subj) {
      if (c < 0 || c >= n_clusters_)
        throw ParseError(what + ": subject " + std::to_string(c) + " out of range");
      if (std::find(seen.begin(), seen.end(), c) != seen.end())
        throw ParseError(what + ": duplicate subject " + std::to_string(c));
      seen.push_back(c);
    }
  };
  for (std::size_t p = 0; p < papers_.size(); ++p)
    check_subjects(paper_subjects_[p], "paper " + papers_[p].paper_id);
  for (const auto& r : reviewers_)
    check_subjects(r.subjects, "reviewer " + r.reviewer_id);
  if (tpms_.size() != papers_.size() * reviewers_.size())
    throw ParseError("tpms matrix size mismatch");
  for (double v : tpms_)
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError("tpms value outside [0,1]");
  if (bids_.reviewer_count() != m() || bids_.paper_count() != n())
    throw ParseError("bid matrix shape mismatch");
}

int Conference::paper_index_of(const std::string& id) const {
  auto it = paper_index_.find(id);
  return it == paper_index_.end() ? -1 : it->second;
}

int Conference::reviewer_index_of(const std::string& id) const {
  auto it = reviewer_index_.find(id);
  return it == reviewer_index_.end() ? -1 : it->second;
}

bool Conference::operator==(const Conference& other) const {
  auto paper_eq = [](const PaperRecord& a, const PaperRecord& b) {
    return a.paper_id == b.paper_id && a.title == b.title &&
           a.abstract_text == b.abstract_text && a.venue == b.venue &&
           a.year == b.year && a.author_ids == b.author_ids &&
           a.out_citations == b.out_citations;
  };
  auto reviewer_eq = [](const ReviewerRecord& a, const ReviewerRecord& b) {
    return a.reviewer_id == b.reviewer_id && a.authored == b.authored &&
           a.subjects == b.subjects;
  };
  return std::equal(papers_.begin(), papers_.end(), other.papers_.begin(),
                    other.papers_.end(), paper_eq) &&
         std::equal(reviewers_.begin(), reviewers_.end(), other.reviewers_.begin(),
                    other.reviewers_.end(), reviewer_eq) &&
         paper_subjects_ == other.paper_subjects_ &&
         n_clusters_ == other.n_clusters_ && tpms_ == other.tpms_ &&
         bids_ == other.bids_ && meta_.seed == other.meta_.seed &&
         meta_.params == other.meta_.params;
}

namespace {

const char* kPapersFile = "papers.jsonl";
const char* kReviewersFile = "reviewers.jsonl";
const char* kPaperSubjectsFile = "paper_subjects.csv";
const char* kTpmsFile = "tpms.csv";
const char* kBidsFile = "bids.csv";
const char* kManifestFile = "manifest.json";

}  // namespace

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  json j;
  j["seed"] = manifest.seed;
  json params = json::object();
  for (const auto& [k, v] : manifest.params) params[k] = v;
  j["params"] = params;
  json files = json::object();
  for (const auto& [k, v] : manifest.file_checksums) files[k] = v;
  j["files"] = files;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ParseError("write to " + path + " failed");
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open manifest " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": invalid json");
  DatasetManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("params").items())
      m.params.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("files").items())
      m.file_checksums.emplace_back(k, v.get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::sort(m.params.begin(), m.params.end());
  std::sort(m.file_checksums.begin(), m.file_checksums.end());
  return m;
}

void save_conference(const Conference& conf, const std::string& dir) {
  fs::create_directories(dir);
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };

  {
    std::ofstream out(path(kPapersFile), std::ios::binary);
    if (!out) throw ParseError("cannot open " + path(kPapersFile) + " for writing");
    for (const auto& p : conf.papers()) {
      json j;
      j["paper_id"] = p.paper_id;
      j["title"] = p.title;
      j["abstract"] = p.abstract_text;
      j["venue"] = p.venue;
      j["year"] = p.year;
      j["author_ids"] = p.author_ids;
      j["out_citations"] = p.out_citations;
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(path(kReviewersFile), std::ios::binary);
    if (!out) throw ParseError("cannot open " + path(kReviewersFile) + " for writing");
    for (const auto& r : conf.reviewers()) {
      json j;
      j["reviewer_id"] = r.reviewer_id;
      j["authored"] = r.authored;
      j["subjects"] = r.subjects;
      out << j.dump() << '\n';
    }
  }
  {
    CsvWriter w(path(kPaperSubjectsFile), {"paper_index", "rank", "cluster_id"});
    for (int p = 0; p < conf.n(); ++p) {
      const auto& subj = conf.paper_subjects(p);
      for (std::size_t k = 0; k < subj.size(); ++k)
        w.write_row({std::to_string(p), std::to_string(k), std::to_string(subj[k])});
    }
    w.close();
  }
  {
    // Zero entries are omitted; absence means 0.
    CsvWriter w(path(kTpmsFile), {"reviewer_index", "paper_index", "value"});
    for (int r = 0; r < conf.m(); ++r)
      for (int p = 0; p < conf.n(); ++p)
        if (conf.tpms(r, p) != 0.0)
          w.write_row({std::to_string(r), std::to_string(p),
                       format_double(conf.tpms(r, p))});
    w.close();
  }
  {
    CsvWriter w(path(kBidsFile), {"reviewer_index", "paper_index", "bid"});
    for (const auto& b : conf.bids().to_triplets())
      w.write_row({std::to_string(b.reviewer), std::to_string(b.paper),
                   std::to_string(b.value)});
    w.close();
  }

  DatasetManifest manifest;
  manifest.seed = conf.meta().seed;
  manifest.params = conf.meta().params;
  manifest.params.emplace_back("n_clusters", std::to_string(conf.n_clusters()));
  std::sort(manifest.params.begin(), manifest.params.end());
  for (const char* name :
       {kPapersFile, kReviewersFile, kPaperSubjectsFile, kTpmsFile, kBidsFile})
    manifest.file_checksums.emplace_back(name, to_hex(fnv1a64_file(path(name))));
  std::sort(manifest.file_checksums.begin(), manifest.file_checksums.end());
  write_manifest(manifest, path(kManifestFile));
}

Conference load_conference(const std::string& dir) {
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  DatasetManifest manifest = read_manifest(path(kManifestFile));
  for (const auto& [name, sum] : manifest.file_checksums) {
    if (!fs::exists(path(name.c_str())))
      throw ParseError("conference file missing: " + name);
    const std::string actual = to_hex(fnv1a64_file(path(name.c_str())));
    if (actual != sum)
      throw ParseError("checksum mismatch for " + name + ": manifest " + sum +
                       ", actual " + actual);
  }

  std::vector<PaperRecord> papers;
  {
    std::ifstream in(path(kPapersFile), std::ios::binary);
    if (!in) throw ParseError("cannot open " + path(kPapersFile));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw ParseError(path(kPapersFile) + ":" + std::to_string(lineno) +
                         ": invalid json");
      PaperRecord rec;
      try {
        rec.paper_id = j.at("paper_id").get<std::string>();
        rec.title = j.at("title").get<std::string>();
        rec.abstract_text = j.at("abstract").get<std::string>();
        rec.venue = j.at("venue").get<std::string>();
        rec.year = j.at("year").get<int>();
        rec.author_ids = j.at("author_ids").get<std::vector<std::string>>();
        rec.out_citations = j.at("out_citations").get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        throw ParseError(path(kPapersFile) + ":" + std::to_string(lineno) + ": " +
                         e.what());
      }
      papers.push_back(std::move(rec));
    }
  }
  std::vector<ReviewerRecord> reviewers;
  {
    std::ifstream in(path(kReviewersFile), std::ios::binary);
    if (!in) throw ParseError("cannot open " + path(kReviewersFile));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw ParseError(path(kReviewersFile) + ":" + std::to_string(lineno) +
                         ": invalid json");
      ReviewerRecord rec;
      try {
        rec.reviewer_id = j.at("reviewer_id").get<std::string>();
        rec.authored = j.at("authored").get<std::vector<std::string>>();
        rec.subjects = j.at("subjects").get<std::vector<int>>();
      } catch (const json::exception& e) {
        throw ParseError(path(kReviewersFile) + ":" + std::to_string(lineno) + ": " +
                         e.what());
      }
      reviewers.push_back(std::move(rec));
    }
  }

  const int m = static_cast<int>(reviewers.size());
  const int n = static_cast<int>(papers.size());
  int n_clusters = 0;
  {
    auto it = std::find_if(manifest.params.begin(), manifest.params.end(),
                           [](const auto& kv) { return kv.first == "n_clusters"; });
    if (it == manifest.params.end())
      throw ParseError(path(kManifestFile) + ": missing n_clusters parameter");
    n_clusters = static_cast<int>(parse_long(it->second, "manifest n_clusters"));
  }

  std::vector<std::vector<int>> paper_subjects(n);
  {
    CsvFile f = read_csv(path(kPaperSubjectsFile));
    if (f.header != std::vector<std::string>{"paper_index", "rank", "cluster_id"})
      throw ParseError(path(kPaperSubjectsFile) + ": unexpected header");
    for (const auto& row : f.rows) {
      const int p = static_cast<int>(parse_long(row[0], "paper_subjects paper_index"));
      const int rank = static_cast<int>(parse_long(row[1], "paper_subjects rank"));
      const int c = static_cast<int>(parse_long(row[2], "paper_subjects cluster_id"));
      if (p < 0 || p >= n) throw ParseError("paper_subjects: paper index out of range");
      if (rank != static_cast<int>(paper_subjects[p].size()))
        throw ParseError("paper_subjects: ranks for paper " + std::to_string(p) +
                         " not contiguous");
      paper_subjects[p].push_back(c);
    }
  }

  std::vector<double> tpms(static_cast<std::size_t>(m) * n, 0.0);
  {
    CsvFile f = read_csv(path(kTpmsFile));
    if (f.header != std::vector<std::string>{"reviewer_index", "paper_index", "value"})
      throw ParseError(path(kTpmsFile) + ": unexpected header");
    for (const auto& row : f.rows) {
      const int r = static_cast<int>(parse_long(row[0], "tpms reviewer_index"));
      const int p = static_cast<int>(parse_long(row[1], "tpms paper_index"));
      if (r < 0 || r >= m || p < 0 || p >= n)
        throw ParseError("tpms: index out of range");
      tpms[static_cast<std::size_t>(r) * n + p] = parse_double(row[2], "tpms value");
    }
  }

  std::vector<Bid> bids;
  {
    CsvFile f = read_csv(path(kBidsFile));
    if (f.header != std::vector<std::string>{"reviewer_index", "paper_index", "bid"})
      throw ParseError(path(kBidsFile) + ": unexpected header");
    for (const auto& row : f.rows) {
      Bid b;
      b.reviewer = static_cast<int>(parse_long(row[0], "bids reviewer_index"));
      b.paper = static_cast<int>(parse_long(row[1], "bids paper_index"));
      b.value = static_cast<int>(parse_long(row[2], "bids bid"));
      bids.push_back(b);
    }
  }

  ConferenceMeta meta;
  meta.seed = manifest.seed;
  for (const auto& kv : manifest.params)
    if (kv.first != "n_clusters") meta.params.push_back(kv);

  return Conference(std::move(papers), std::move(reviewers), std::move(paper_subjects),
                    n_clusters, std::move(tpms), BidMatrix(m, n, bids),
                    std::move(meta));
}

}  // namespace robustbid
