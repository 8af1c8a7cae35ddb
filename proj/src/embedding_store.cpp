#include "epialign/embedding_store.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>

#include "epialign/error.hpp"

namespace epialign::features {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};
constexpr std::uint8_t kVersion = 1;
// Sanity cap so a corrupt header cannot trigger a huge allocation.
constexpr std::uint32_t kMaxDim = 1U << 20;

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), bytes.size());
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::uint64_t offset() const { return offset_; }

    void read(char* dst, std::size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        const auto got = static_cast<std::size_t>(in_.gcount());
        if (got != n) {
            throw FormatError(std::string("truncated EMB1 file while reading ") + what, offset_ + got);
        }
        offset_ += n;
    }

    template <typename T>
    T get_le(const char* what) {
        std::array<unsigned char, sizeof(T)> bytes;
        read(reinterpret_cast<char*>(bytes.data()), bytes.size(), what);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        }
        return static_cast<T>(v);
    }

    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

}  // namespace

EmbeddingStore::EmbeddingStore(std::uint32_t dim) : dim_(dim) {
    if (dim == 0) {
        throw ContractError("embedding dimension must be positive");
    }
}

bool EmbeddingStore::insert(std::string id, std::span<const float> vector) {
    if (vector.size() != dim_) {
        throw ContractError("embedding for '" + id + "' has " + std::to_string(vector.size()) +
                            " components, store dim is " + std::to_string(dim_));
    }
    if (id.size() > 0xFFFF) {
        throw ContractError("tweet id longer than 65535 bytes");
    }
    for (float v : vector) {
        if (!std::isfinite(v)) {
            throw ContractError("embedding for '" + id + "' has a non-finite component");
        }
    }
    if (const auto it = index_.find(id); it != index_.end()) {
        std::copy(vector.begin(), vector.end(), values_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
        return false;
    }
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    values_.insert(values_.end(), vector.begin(), vector.end());
    return true;
}

std::optional<std::span<const float>> EmbeddingStore::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return std::span<const float>(values_).subspan(it->second * dim_, dim_);
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    if (a.dim_ != b.dim_ || a.size() != b.size()) {
        return false;
    }
    for (const std::string& id : a.ids_) {
        const auto other = b.find(id);
        if (!other) {
            return false;
        }
        const auto mine = *a.find(id);
        // Bitwise comparison: float32 round-trip must be exact.
        if (std::memcmp(mine.data(), other->data(), mine.size_bytes()) != 0) {
            return false;
        }
    }
    return true;
}

StoreReadResult read_embedding_store(std::istream& in) {
    Reader r(in);
    std::array<char, 4> magic{};
    r.read(magic.data(), magic.size(), "magic");
    if (magic != kMagic) {
        throw FormatError("bad EMB1 magic", 0);
    }
    const std::uint64_t version_at = r.offset();
    if (const auto version = r.get_le<std::uint8_t>("version"); version != kVersion) {
        throw UnsupportedVersionError("unsupported EMB1 version " + std::to_string(version), version_at);
    }
    const std::uint64_t dim_at = r.offset();
    const auto dim = r.get_le<std::uint32_t>("dim");
    if (dim == 0) {
        throw FormatError("EMB1 dim is 0", dim_at);
    }
    if (dim > kMaxDim) {
        throw FormatError("EMB1 dim " + std::to_string(dim) + " exceeds " + std::to_string(kMaxDim), dim_at);
    }
    const auto count = r.get_le<std::uint64_t>("record count");

    StoreReadResult result{EmbeddingStore(dim), {}};
    std::string id;
    std::vector<float> vec(dim);
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        const std::uint64_t record_at = r.offset();
        const auto len = r.get_le<std::uint16_t>("id length");
        id.resize(len);
        r.read(id.data(), len, "id bytes");
        const std::uint64_t values_at = r.offset();
        for (float& v : vec) {
            v = std::bit_cast<float>(r.get_le<std::uint32_t>("vector"));
        }
        for (std::size_t i = 0; i < vec.size(); ++i) {
            if (!std::isfinite(vec[i])) {
                throw FormatError("non-finite component in record " + std::to_string(rec), values_at + 4 * i);
            }
        }
        if (!result.store.insert(id, vec)) {
            result.warnings.push_back("duplicate id '" + id + "' at byte offset " + std::to_string(record_at) +
                                      "; last record wins");
        }
    }
    if (!r.at_end()) {
        throw FormatError("trailing bytes after " + std::to_string(count) + " EMB1 records", r.offset());
    }
    return result;
}

void write_embedding_store(const EmbeddingStore& store, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint8_t>(out, kVersion);
    put_le<std::uint32_t>(out, store.dim());
    put_le<std::uint64_t>(out, store.size());
    for (const std::string& id : store.ids()) {
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        const std::span<const float> values = *store.find(id);
        for (float v : values) {
            put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
        }
    }
    if (!out) {
        throw IoError("failed writing EMB1 store");
    }
}

}  // namespace epialign::features
