#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace robustbid {

// One bibliography record. out_citations may reference papers outside the
// corpus; such dangling ids are kept on the record but excluded from the
// resolved citation graph.
struct PaperRecord {
  std::string paper_id;
  std::string title;
  std::string abstract_text;
  std::string venue;
  int year = 0;
  std::vector<std::string> author_ids;
  std::vector<std::string> out_citations;
};

// A paper corpus with its resolved citation graph and author index.
class Corpus {
 public:
  explicit Corpus(std::vector<PaperRecord> papers);

  int size() const { return static_cast<int>(papers_.size()); }
  const PaperRecord& paper(int i) const { return papers_[i]; }
  const std::vector<PaperRecord>& papers() const { return papers_; }

  // -1 when the id is unknown.
  int index_of(const std::string& paper_id) const;

  // Resolved citation adjacency, indices sorted ascending.
  const std::vector<int>& cited_by_paper(int i) const { return out_cites_[i]; }
  const std::vector<int>& citing_papers(int i) const { return in_cites_[i]; }
  int in_citation_count(int i) const { return static_cast<int>(in_cites_[i].size()); }
  long total_in_citations() const { return total_edges_; }
  long dangling_citation_count() const { return dangling_; }

  // Citation neighborhood: in-citations united with out-citations, sorted.
  std::vector<int> neighborhood(int i) const;

  const std::vector<std::string>& author_ids() const { return author_order_; }
  // Papers authored by the given author, ascending indices.
  const std::vector<int>& papers_of_author(const std::string& author_id) const;

 private:
  std::vector<PaperRecord> papers_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> out_cites_, in_cites_;
  std::unordered_map<std::string, std::vector<int>> by_author_;
  std::vector<std::string> author_order_;  // sorted, for deterministic iteration
  long total_edges_ = 0;
  long dangling_ = 0;
};

// Reads a JSONL corpus (one paper object per line). Rejects duplicate ids,
// missing fields and non-positive years, with the offending line number.
Corpus load_corpus(const std::string& path);

void save_corpus(const Corpus& corpus, const std::string& path);

}  // namespace robustbid
