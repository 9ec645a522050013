#include "dialweight/tfidf.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dialweight/checkpoint.hpp"
#include "dialweight/error.hpp"

namespace dialweight {

TfIdfIndex::TfIdfIndex(const std::vector<std::vector<std::string>>& documents) {
  for (const auto& d : documents) add_document(d);
}

void TfIdfIndex::add_document(const std::vector<std::string>& tokens) {
  ++documents_;
  for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) ++df_[t];
}

std::size_t TfIdfIndex::document_frequency(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double TfIdfIndex::idf(const std::string& token) const {
  const double n = static_cast<double>(documents_);
  const double df = static_cast<double>(document_frequency(token));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

SparseVector TfIdfIndex::vectorize(const std::vector<std::string>& tokens) const {
  SparseVector v;
  for (const auto& t : tokens) v[t] += 1.0;
  for (auto& [t, x] : v) x *= idf(t);
  return v;
}

nlohmann::json TfIdfIndex::to_json(std::uint64_t vocab_fingerprint) const {
  return {{"vocab_fingerprint", hex64(vocab_fingerprint)},
          {"documents", documents_},
          {"document_frequency", df_}};
}

TfIdfIndex TfIdfIndex::from_json(const nlohmann::json& j, std::uint64_t* vocab_fingerprint) {
  try {
    TfIdfIndex index;
    index.documents_ = j.at("documents").get<std::size_t>();
    index.df_ = j.at("document_frequency").get<std::map<std::string, std::size_t>>();
    if (vocab_fingerprint) *vocab_fingerprint = std::stoull(j.at("vocab_fingerprint").get<std::string>(), nullptr, 16);
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed TF-IDF index: ") + e.what());
  } catch (const std::logic_error& e) {
    throw DataError(std::string("malformed TF-IDF fingerprint: ") + e.what());
  }
}

void TfIdfIndex::save(const std::filesystem::path& path, std::uint64_t vocab_fingerprint) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(vocab_fingerprint).dump() << '\n';
}

TfIdfIndex TfIdfIndex::load(const std::filesystem::path& path, std::uint64_t* vocab_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return from_json(j, vocab_fingerprint);
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) {
  // Walk both maps in token order so that swapping the arguments performs
  // the same floating-point operations.
  double dot = 0.0;
  for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += i->second * j->second;
      ++i;
      ++j;
    }
  }
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [t, x] : a) na += x * x;
  for (const auto& [t, y] : b) nb += y * y;
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): identical vectors then
  // give exactly 1.
  return dot / std::sqrt(na * nb);
}

double tfidf_similarity(const std::vector<std::string>& context, const std::vector<std::string>& response,
                        const TfIdfIndex& index) {
  return cosine_similarity(index.vectorize(context), index.vectorize(response));
}

}  // namespace dialweight
