#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mpnet {

/// A token value. Transparent values (unit, booleans, naturals, tuples,
/// records) can be inspected; opaque values are byte blobs compared only
/// for equality. `Any` is the wildcard used in MPI envelopes.
class Value {
 public:
  enum class Kind : std::uint8_t { Unit, Bool, Nat, Tuple, Record, Opaque, Any };

  using Field = std::pair<std::string, Value>;

  Value() = default;  // unit

  static Value unit() { return Value(); }
  static Value boolean(bool b);
  static Value nat(std::uint64_t n);
  static Value tuple(std::vector<Value> elements);
  /// Fields are stored sorted by name; duplicate names throw.
  static Value record(std::vector<Field> fields);
  static Value opaque(std::string bytes, std::string origin = {});
  static Value any();

  Kind kind() const { return kind_; }
  bool is(Kind k) const { return kind_ == k; }

  bool as_bool() const;
  std::uint64_t as_nat() const;
  std::span<const Value> elements() const;
  std::span<const Field> fields() const;
  /// nullptr when this is not a record or the field is absent.
  const Value* field(std::string_view name) const;
  /// Copy of this record with `name` set to `v` (added when absent).
  Value with_field(std::string_view name, Value v) const;
  const std::string& bytes() const;
  const std::string& origin() const;

  /// Stable 64-bit structural hash (identical across runs and platforms).
  std::uint64_t hash() const;

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  struct Opaque {
    std::string bytes;
    std::string origin;
  };

  const std::vector<Value>& tuple_ref() const;
  const std::vector<Field>& record_ref() const;
  const Opaque& opaque_ref() const;

  Kind kind_ = Kind::Unit;
  std::uint64_t scalar_ = 0;
  // vector<Value> | vector<Field> | Opaque, selected by kind_
  std::shared_ptr<const void> payload_;
};

const char* to_string(Value::Kind kind);

/// Human-readable rendering; parseable by the expression grammar for every
/// value except opaque blobs with non-printable bytes.
std::string to_string(const Value& v);

/// Equality where `Any` on either side matches anything (recursively).
bool loose_equal(const Value& a, const Value& b);

/// Restrict a record to the given fields; non-records and empty keys are
/// returned unchanged.
Value project(const Value& v, std::span<const std::string> keys);

/// Admissible-value descriptor of a place (its colour set).
enum class Color : std::uint8_t { Any, Unit, Bool, Nat, Tuple, Record, Opaque };

const char* to_string(Color c);
std::optional<Color> color_from_string(std::string_view s);
bool admits(Color c, const Value& v);

/// Variable name -> value. Ordered so that bindings compare and print
/// canonically.
using Binding = std::map<std::string, Value, std::less<>>;

std::string to_string(const Binding& b);

// Stable hashing helpers shared by the state code.
std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t v);
std::uint64_t hash_bytes(std::uint64_t seed, std::string_view bytes);

}  // namespace mpnet
