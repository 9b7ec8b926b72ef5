#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "robustbid/conference.hpp"
#include "robustbid/sparse.hpp"

namespace robustbid::featurize {

// Everything featurization is allowed to read. Bids are deliberately not
// representable here: features must stay label-free, and the type system is
// the enforcement.
struct FeatureInputs {
  int m = 0, n = 0, n_clusters = 0;
  std::vector<std::string> title_vocab;  // sorted tokens over conference titles
  // Per paper: (vocab index, count), strictly increasing indices.
  std::vector<std::vector<std::pair<int, int>>> paper_titles;
  // Ascending cluster ids (indicator blocks do not care about subject rank).
  std::vector<std::vector<int>> paper_subjects;
  std::vector<std::vector<int>> reviewer_subjects;
  std::vector<double> tpms;  // m*n row-major
};

FeatureInputs make_feature_inputs(const Conference& conf);

struct FeatureBlock {
  std::string name;
  long raw_dim = 0;
  bool hashed = false;
  int bucket_count = 0;  // equals raw_dim for unhashed blocks
  int offset = 0;        // first column of this block in the assembled row
};

// Fixed block order: PT, PS, RS, IS, TV, then the four hashed quadratic
// crosses RSxPS, RSxPT, ISxPT, ISxTV. TV is 12 wide: the raw similarity
// value plus 11 equal-width bins over [0,1] carrying the bin midpoint.
struct FeatureSchema {
  double hash_ratio = 0.01;
  int min_buckets = 4;
  std::vector<FeatureBlock> blocks;
  int total_dim = 0;

  const FeatureBlock& block(const std::string& name) const;
};

inline constexpr int kTvDim = 12;

// Bucket counts for hashed blocks are max(min_buckets, floor(ratio*raw_dim)).
FeatureSchema build_schema_dims(long title_vocab, long n_clusters, double hash_ratio,
                                int min_buckets = 4);
FeatureSchema build_schema(const FeatureInputs& inputs, double hash_ratio,
                           int min_buckets = 4);

void save_schema(const FeatureSchema& schema, const std::string& path);
FeatureSchema load_schema(const std::string& path);

// Signed feature hashing. Bucket and sign come from two FNV-1a streams over
// ("idx" + salt + big-endian raw index) and ("sign" + salt + big-endian raw
// index); the sign is bit 63 of the second digest. Linear by construction:
// hash(a) + hash(b) = hash(a + b). Exact cancellations are dropped.
std::vector<std::pair<int, double>> hash_block(
    const std::vector<std::pair<long, double>>& entries, int bucket_count,
    const std::string& salt = "");

// One (reviewer, paper) feature row under the schema: sorted, no zeros.
std::vector<std::pair<int, double>> assemble_row(const FeatureInputs& inputs,
                                                 const FeatureSchema& schema, int r,
                                                 int p);

// All m*n rows, reviewer-major: row index r*n + p.
CsrMatrix assemble_feature_matrix(const FeatureInputs& inputs,
                                  const FeatureSchema& schema);

// Feature matrix files. Binary is the default interchange format; the CSV
// flavor ("row,col,value" triplets) is for inspection and interop.
struct FeatureFile {
  int m = 0, n = 0;
  CsrMatrix matrix;
};

void save_features(const FeatureFile& file, const std::string& path, bool csv = false);
FeatureFile load_features(const std::string& path);

}  // namespace robustbid::featurize
