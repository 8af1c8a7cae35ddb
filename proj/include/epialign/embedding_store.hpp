#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace epialign::features {

/// Fixed-dimension float32 vector per tweet id. Iteration follows insertion
/// order so that serialization is deterministic.
class EmbeddingStore {
public:
    /// Throws ContractError when dim == 0.
    explicit EmbeddingStore(std::uint32_t dim);

    std::uint32_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    /// Inserts or replaces. Returns false when an existing entry was replaced
    /// (its position is kept). Throws ContractError on a wrong dimension, a
    /// non-finite component or an id longer than 65535 bytes.
    bool insert(std::string id, std::span<const float> vector);

    std::optional<std::span<const float>> find(std::string_view id) const;

    const std::vector<std::string>& ids() const { return ids_; }

    friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

private:
    std::uint32_t dim_;
    std::vector<std::string> ids_;
    std::vector<float> values_;  // row-major, ids_.size() x dim_
    std::unordered_map<std::string, std::size_t> index_;
};

struct StoreReadResult {
    EmbeddingStore store;
    std::vector<std::string> warnings;
};

/// Reads the little-endian EMB1 format:
///   "EMB1" | u8 version=1 | u32 dim | u64 count | count x (u16 len | id | dim x f32)
/// Throws FormatError carrying the byte offset of the first problem.
StoreReadResult read_embedding_store(std::istream& in);

void write_embedding_store(const EmbeddingStore& store, std::ostream& out);

}  // namespace epialign::features
