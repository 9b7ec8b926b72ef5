#include "robustbid/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "robustbid/errors.hpp"

namespace robustbid {

using nlohmann::json;

Corpus::Corpus(std::vector<PaperRecord> papers) : papers_(std::move(papers)) {
  index_.reserve(papers_.size());
  for (int i = 0; i < size(); ++i) {
    const auto& id = papers_[i].paper_id;
    if (id.empty()) throw ParseError("corpus: empty paper_id at record " + std::to_string(i));
    if (!index_.emplace(id, i).second)
      throw ParseError("corpus: duplicate paper_id '" + id + "'");
  }
  out_cites_.resize(papers_.size());
  in_cites_.resize(papers_.size());
  for (int i = 0; i < size(); ++i) {
    for (const auto& cited : papers_[i].out_citations) {
      const int j = index_of(cited);
      if (j < 0) {
        ++dangling_;
        continue;
      }
      out_cites_[i].push_back(j);
      in_cites_[j].push_back(i);
      ++total_edges_;
    }
  }
  for (auto& v : out_cites_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : in_cites_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  // total_edges_ counts distinct resolved edges
  total_edges_ = 0;
  for (const auto& v : in_cites_) total_edges_ += static_cast<long>(v.size());

  for (int i = 0; i < size(); ++i)
    for (const auto& a : papers_[i].author_ids) by_author_[a].push_back(i);
  author_order_.reserve(by_author_.size());
  for (const auto& [a, v] : by_author_) author_order_.push_back(a);
  std::sort(author_order_.begin(), author_order_.end());
}

int Corpus::index_of(const std::string& paper_id) const {
  auto it = index_.find(paper_id);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> Corpus::neighborhood(int i) const {
  std::vector<int> out;
  out.reserve(out_cites_[i].size() + in_cites_[i].size());
  std::set_union(out_cites_[i].begin(), out_cites_[i].end(), in_cites_[i].begin(),
                 in_cites_[i].end(), std::back_inserter(out));
  return out;
}

const std::vector<int>& Corpus::papers_of_author(const std::string& author_id) const {
  static const std::vector<int> empty;
  auto it = by_author_.find(author_id);
  return it == by_author_.end() ? empty : it->second;
}

namespace {

PaperRecord parse_paper(const json& j, const std::string& context) {
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
    throw ParseError(context + ": " + e.what());
  }
  if (rec.year <= 0) throw ParseError(context + ": year must be positive");
  return rec;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file " + path);
  std::vector<PaperRecord> papers;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string context = path + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(context + ": invalid json");
    papers.push_back(parse_paper(j, context));
  }
  return Corpus(std::move(papers));
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  for (const auto& p : corpus.papers()) {
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
  if (!out) throw ParseError("write to " + path + " failed");
}

}  // namespace robustbid
