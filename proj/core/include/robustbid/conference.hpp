#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "robustbid/corpus.hpp"

namespace robustbid {

// Bid values live in {0,1,2,3}; zero is never materialized. A (reviewer,
// paper) pair absent from the matrix means bid 0.
struct Bid {
  int reviewer = 0;
  int paper = 0;
  int value = 0;
};

class BidMatrix {
 public:
  BidMatrix() = default;
  BidMatrix(int m, int n) : m_(m), n_(n), rows_(m) {}
  BidMatrix(int m, int n, const std::vector<Bid>& bids);

  int reviewer_count() const { return m_; }
  int paper_count() const { return n_; }

  // Sorted by paper index, values in {1,2,3}.
  const std::vector<std::pair<int, int>>& row(int r) const { return rows_[r]; }
  void set_row(int r, std::vector<std::pair<int, int>> entries);

  int value_at(int r, int p) const;
  int positive_count(int r) const { return static_cast<int>(rows_[r].size()); }
  std::size_t total_positive() const;

  std::vector<Bid> to_triplets() const;
  // Dense label vector of length m*n, row-major (r*n + p).
  std::vector<double> to_labels() const;

  bool operator==(const BidMatrix& other) const = default;

 private:
  int m_ = 0, n_ = 0;
  std::vector<std::vector<std::pair<int, int>>> rows_;
};

struct ReviewerRecord {
  std::string reviewer_id;
  std::vector<std::string> authored;  // paper ids in the corpus
  std::vector<int> subjects;          // ranked cluster ids, at most 5
};

// Generation provenance carried into manifest.json.
struct ConferenceMeta {
  std::uint64_t seed = 0;
  // Ordered key/value record of the generating parameters.
  std::vector<std::pair<std::string, std::string>> params;
};

// A conference instance: papers and reviewers in sorted-id order (dense
// indices are positions in those orders), per-entity subject areas, the
// dense similarity matrix and the sparse bid matrix.
class Conference {
 public:
  Conference() = default;
  Conference(std::vector<PaperRecord> papers, std::vector<ReviewerRecord> reviewers,
             std::vector<std::vector<int>> paper_subjects, int n_clusters,
             std::vector<double> tpms, BidMatrix bids, ConferenceMeta meta);

  int m() const { return static_cast<int>(reviewers_.size()); }
  int n() const { return static_cast<int>(papers_.size()); }
  int n_clusters() const { return n_clusters_; }

  const std::vector<PaperRecord>& papers() const { return papers_; }
  const std::vector<ReviewerRecord>& reviewers() const { return reviewers_; }
  const std::vector<int>& paper_subjects(int p) const { return paper_subjects_[p]; }
  const std::vector<int>& reviewer_subjects(int r) const { return reviewers_[r].subjects; }

  double tpms(int r, int p) const { return tpms_[static_cast<std::size_t>(r) * n() + p]; }
  const std::vector<double>& tpms_matrix() const { return tpms_; }

  const BidMatrix& bids() const { return bids_; }
  BidMatrix& mutable_bids() { return bids_; }

  const ConferenceMeta& meta() const { return meta_; }

  int paper_index_of(const std::string& id) const;
  int reviewer_index_of(const std::string& id) const;

  bool operator==(const Conference& other) const;

 private:
  void validate() const;

  std::vector<PaperRecord> papers_;
  std::vector<ReviewerRecord> reviewers_;
  std::vector<std::vector<int>> paper_subjects_;
  int n_clusters_ = 0;
  std::vector<double> tpms_;
  BidMatrix bids_;
  ConferenceMeta meta_;
  std::unordered_map<std::string, int> paper_index_, reviewer_index_;
};

// Directory layout: papers.jsonl, reviewers.jsonl, paper_subjects.csv,
// tpms.csv, bids.csv, manifest.json. The manifest records the seed, the
// parameter record and a checksum per emitted file; load_conference verifies
// all of them and names the offending file on mismatch.
void save_conference(const Conference& conf, const std::string& dir);
Conference load_conference(const std::string& dir);

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> file_checksums;  // name -> fnv64 hex
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

}  // namespace robustbid
