#include "robustbid/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/hashing.hpp"
#include "robustbid/text.hpp"

namespace robustbid::featurize {

using nlohmann::json;

FeatureInputs make_feature_inputs(const Conference& conf) {
  FeatureInputs in;
  in.m = conf.m();
  in.n = conf.n();
  in.n_clusters = conf.n_clusters();

  std::set<std::string> vocab;
  std::vector<std::vector<std::string>> title_tokens(conf.n());
  for (int p = 0; p < conf.n(); ++p) {
    title_tokens[p] = tokenize(conf.papers()[p].title);
    vocab.insert(title_tokens[p].begin(), title_tokens[p].end());
  }
  in.title_vocab.assign(vocab.begin(), vocab.end());  // set is sorted

  std::map<std::string, int> vocab_index;
  for (std::size_t i = 0; i < in.title_vocab.size(); ++i)
    vocab_index[in.title_vocab[i]] = static_cast<int>(i);
  in.paper_titles.resize(conf.n());
  for (int p = 0; p < conf.n(); ++p) {
    std::map<int, int> counts;
    for (const auto& tok : title_tokens[p]) ++counts[vocab_index[tok]];
    in.paper_titles[p].assign(counts.begin(), counts.end());
  }

  in.paper_subjects.resize(conf.n());
  for (int p = 0; p < conf.n(); ++p) {
    in.paper_subjects[p] = conf.paper_subjects(p);
    std::sort(in.paper_subjects[p].begin(), in.paper_subjects[p].end());
  }
  in.reviewer_subjects.resize(conf.m());
  for (int r = 0; r < conf.m(); ++r) {
    in.reviewer_subjects[r] = conf.reviewer_subjects(r);
    std::sort(in.reviewer_subjects[r].begin(), in.reviewer_subjects[r].end());
  }
  in.tpms = conf.tpms_matrix();
  return in;
}

const FeatureBlock& FeatureSchema::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw ParamError("unknown feature block '" + name + "'");
}

FeatureSchema build_schema_dims(long title_vocab, long n_clusters, double hash_ratio,
                                int min_buckets) {
  if (hash_ratio <= 0.0) throw ParamError("hash_ratio must be positive");
  if (min_buckets < 1) throw ParamError("min_buckets must be >= 1");
  FeatureSchema schema;
  schema.hash_ratio = hash_ratio;
  schema.min_buckets = min_buckets;

  auto buckets = [&](long raw) {
    const long b = static_cast<long>(std::floor(hash_ratio * static_cast<double>(raw)));
    return static_cast<int>(std::max<long>(min_buckets, b));
  };
  auto add = [&](const std::string& name, long raw, bool hashed) {
    FeatureBlock b;
    b.name = name;
    b.raw_dim = raw;
    b.hashed = hashed;
    b.bucket_count = hashed ? buckets(raw) : static_cast<int>(raw);
    b.offset = schema.total_dim;
    schema.total_dim += b.bucket_count;
    schema.blocks.push_back(std::move(b));
  };

  add("PT", title_vocab, false);
  add("PS", n_clusters, false);
  add("RS", n_clusters, false);
  add("IS", n_clusters, false);
  add("TV", kTvDim, false);
  add("RSxPS", n_clusters * n_clusters, true);
  add("RSxPT", n_clusters * title_vocab, true);
  add("ISxPT", n_clusters * title_vocab, true);
  add("ISxTV", n_clusters * kTvDim, true);
  return schema;
}

FeatureSchema build_schema(const FeatureInputs& inputs, double hash_ratio,
                           int min_buckets) {
  return build_schema_dims(static_cast<long>(inputs.title_vocab.size()),
                           inputs.n_clusters, hash_ratio, min_buckets);
}

void save_schema(const FeatureSchema& schema, const std::string& path) {
  json j;
  j["hash_ratio"] = schema.hash_ratio;
  j["min_buckets"] = schema.min_buckets;
  j["total_dim"] = schema.total_dim;
  j["blocks"] = json::array();
  for (const auto& b : schema.blocks) {
    json jb;
    jb["name"] = b.name;
    jb["raw_dim"] = b.raw_dim;
    jb["hashed"] = b.hashed;
    jb["bucket_count"] = b.bucket_count;
    jb["offset"] = b.offset;
    j["blocks"].push_back(jb);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ParseError("write to " + path + " failed");
}

FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open schema " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": invalid json");
  FeatureSchema schema;
  try {
    schema.hash_ratio = j.at("hash_ratio").get<double>();
    schema.min_buckets = j.at("min_buckets").get<int>();
    schema.total_dim = j.at("total_dim").get<int>();
    for (const auto& jb : j.at("blocks")) {
      FeatureBlock b;
      b.name = jb.at("name").get<std::string>();
      b.raw_dim = jb.at("raw_dim").get<long>();
      b.hashed = jb.at("hashed").get<bool>();
      b.bucket_count = jb.at("bucket_count").get<int>();
      b.offset = jb.at("offset").get<int>();
      schema.blocks.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  int expect = 0;
  for (const auto& b : schema.blocks) {
    if (b.offset != expect) throw ParseError(path + ": inconsistent block offsets");
    expect += b.bucket_count;
  }
  if (expect != schema.total_dim) throw ParseError(path + ": total_dim mismatch");
  return schema;
}

namespace {

int hash_bucket(long raw_index, int bucket_count, const std::string& salt) {
  std::uint64_t h = fnv1a64("idx");
  h = fnv1a64(salt, h);
  h = fnv1a64_u64(static_cast<std::uint64_t>(raw_index), h);
  return static_cast<int>(mix64(h) % static_cast<std::uint64_t>(bucket_count));
}

double hash_sign(long raw_index, const std::string& salt) {
  std::uint64_t h = fnv1a64("sign");
  h = fnv1a64(salt, h);
  h = fnv1a64_u64(static_cast<std::uint64_t>(raw_index), h);
  return (mix64(h) >> 63) ? -1.0 : 1.0;
}

}  // namespace

std::vector<std::pair<int, double>> hash_block(
    const std::vector<std::pair<long, double>>& entries, int bucket_count,
    const std::string& salt) {
  if (bucket_count < 1) throw ParamError("bucket_count must be >= 1");
  std::map<int, double> acc;
  for (const auto& [raw, value] : entries) {
    if (value == 0.0) continue;
    acc[hash_bucket(raw, bucket_count, salt)] += hash_sign(raw, salt) * value;
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(acc.size());
  for (const auto& [bucket, value] : acc)
    if (value != 0.0) out.emplace_back(bucket, value);
  return out;
}

namespace {

// TV encoding: dim 0 raw value, dims 1..11 the active equal-width bin with
// its midpoint as value. tpms == 1.0 lands in the last bin.
std::vector<std::pair<int, double>> tv_entries(double tpms) {
  std::vector<std::pair<int, double>> out;
  if (tpms != 0.0) out.emplace_back(0, tpms);
  int bin = static_cast<int>(std::floor(tpms * 11.0));
  bin = std::min(bin, 10);
  out.emplace_back(1 + bin, (bin + 0.5) / 11.0);
  return out;
}

void append_block(std::vector<std::pair<int, double>>& row, const FeatureBlock& block,
                  const std::vector<std::pair<long, double>>& raw_entries) {
  if (block.hashed) {
    for (const auto& [bucket, value] : hash_block(raw_entries, block.bucket_count))
      row.emplace_back(block.offset + bucket, value);
  } else {
    for (const auto& [idx, value] : raw_entries) {
      if (value == 0.0) continue;
      row.emplace_back(block.offset + static_cast<int>(idx), value);
    }
  }
}

}  // namespace

std::vector<std::pair<int, double>> assemble_row(const FeatureInputs& inputs,
                                                 const FeatureSchema& schema, int r,
                                                 int p) {
  const auto& ps = inputs.paper_subjects[p];
  const auto& rs = inputs.reviewer_subjects[r];
  std::vector<int> is;
  std::set_intersection(rs.begin(), rs.end(), ps.begin(), ps.end(),
                        std::back_inserter(is));
  const double tpms = inputs.tpms[static_cast<std::size_t>(r) * inputs.n + p];
  const auto tv = tv_entries(tpms);

  std::vector<std::pair<long, double>> raw;
  std::vector<std::pair<int, double>> row;
  auto block = [&](const char* name) -> const FeatureBlock& { return schema.block(name); };

  raw.clear();
  for (const auto& [idx, count] : inputs.paper_titles[p])
    raw.emplace_back(idx, static_cast<double>(count));
  append_block(row, block("PT"), raw);

  raw.clear();
  for (int c : ps) raw.emplace_back(c, 1.0);
  append_block(row, block("PS"), raw);

  raw.clear();
  for (int c : rs) raw.emplace_back(c, 1.0);
  append_block(row, block("RS"), raw);

  raw.clear();
  for (int c : is) raw.emplace_back(c, 1.0);
  append_block(row, block("IS"), raw);

  raw.clear();
  for (const auto& [idx, value] : tv) raw.emplace_back(idx, value);
  append_block(row, block("TV"), raw);

  const long vocab = static_cast<long>(inputs.title_vocab.size());

  raw.clear();
  for (int i : rs)
    for (int j : ps) raw.emplace_back(static_cast<long>(i) * inputs.n_clusters + j, 1.0);
  append_block(row, block("RSxPS"), raw);

  raw.clear();
  for (int i : rs)
    for (const auto& [j, count] : inputs.paper_titles[p])
      raw.emplace_back(static_cast<long>(i) * vocab + j, static_cast<double>(count));
  append_block(row, block("RSxPT"), raw);

  raw.clear();
  for (int i : is)
    for (const auto& [j, count] : inputs.paper_titles[p])
      raw.emplace_back(static_cast<long>(i) * vocab + j, static_cast<double>(count));
  append_block(row, block("ISxPT"), raw);

  raw.clear();
  for (int i : is)
    for (const auto& [j, value] : tv)
      raw.emplace_back(static_cast<long>(i) * kTvDim + j, value);
  append_block(row, block("ISxTV"), raw);

  std::sort(row.begin(), row.end());
  return row;
}

CsrMatrix assemble_feature_matrix(const FeatureInputs& inputs,
                                  const FeatureSchema& schema) {
  CsrMatrix X(inputs.m * inputs.n, schema.total_dim);
  for (int r = 0; r < inputs.m; ++r)
    for (int p = 0; p < inputs.n; ++p) X.append_row(assemble_row(inputs, schema, r, p));
  return X;
}

namespace {
constexpr char kFeatureMagic[8] = {'R', 'B', 'F', 'E', 'A', 'T', '0', '1'};
}

void save_features(const FeatureFile& file, const std::string& path, bool csv) {
  if (csv) {
    CsvWriter w(path, {"row", "col", "value"});
    for (int i = 0; i < file.matrix.rows(); ++i) {
      const auto row = file.matrix.row(i);
      for (std::size_t k = 0; k < row.len; ++k)
        w.write_row({std::to_string(i), std::to_string(row.col[k]),
                     format_double(row.val[k])});
    }
    w.close();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (56 - 8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
  };
  out.write(kFeatureMagic, 8);
  put_u64(static_cast<std::uint64_t>(file.m));
  put_u64(static_cast<std::uint64_t>(file.n));
  put_u64(static_cast<std::uint64_t>(file.matrix.cols()));
  put_u64(file.matrix.nnz());
  for (int i = 0; i < file.matrix.rows(); ++i) {
    const auto row = file.matrix.row(i);
    put_u64(row.len);
    for (std::size_t k = 0; k < row.len; ++k) {
      put_u64(static_cast<std::uint64_t>(row.col[k]));
      std::uint64_t bits;
      static_assert(sizeof bits == sizeof row.val[0]);
      std::memcpy(&bits, &row.val[k], 8);
      put_u64(bits);
    }
  }
  if (!out) throw ParseError("write to " + path + " failed");
}

FeatureFile load_features(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    throw ParseError(path + ": csv feature files are export-only; "
                            "use the binary format as pipeline input");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open features " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kFeatureMagic, 8) != 0)
    throw ParseError(path + ": not a feature file");
  auto get_u64 = [&]() {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | buf[i];
    return v;
  };
  FeatureFile file;
  file.m = static_cast<int>(get_u64());
  file.n = static_cast<int>(get_u64());
  const int d = static_cast<int>(get_u64());
  const std::uint64_t nnz = get_u64();
  file.matrix = CsrMatrix(file.m * file.n, d);
  std::uint64_t seen = 0;
  for (int i = 0; i < file.m * file.n; ++i) {
    const std::uint64_t len = get_u64();
    std::vector<std::pair<int, double>> entries(len);
    for (auto& [c, v] : entries) {
      c = static_cast<int>(get_u64());
      const std::uint64_t bits = get_u64();
      std::memcpy(&v, &bits, 8);
    }
    if (!in) throw ParseError(path + ": truncated feature file");
    file.matrix.append_row(entries);
    seen += len;
  }
  if (seen != nnz) throw ParseError(path + ": nnz count mismatch");
  return file;
}

}  // namespace robustbid::featurize
