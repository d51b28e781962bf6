#include "mpnet/value.hpp"

#include <algorithm>
#include <sstream>

#include "mpnet/error.hpp"

namespace mpnet {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::string escape_bytes(const std::string& bytes) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c >= 0x20 && c < 0x7f) {
      out += static_cast<char>(c);
    } else {
      out += "\\x";
      out += hex[c >> 4];
      out += hex[c & 0xf];
    }
  }
  return out;
}

}  // namespace

std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    seed ^= (v >> (8 * i)) & 0xff;
    seed *= kFnvPrime;
  }
  return seed;
}

std::uint64_t hash_bytes(std::uint64_t seed, std::string_view bytes) {
  for (unsigned char c : bytes) {
    seed ^= c;
    seed *= kFnvPrime;
  }
  return hash_mix(seed, bytes.size());
}

Value Value::boolean(bool b) {
  Value v;
  v.kind_ = Kind::Bool;
  v.scalar_ = b ? 1 : 0;
  return v;
}

Value Value::nat(std::uint64_t n) {
  Value v;
  v.kind_ = Kind::Nat;
  v.scalar_ = n;
  return v;
}

Value Value::tuple(std::vector<Value> elements) {
  Value v;
  v.kind_ = Kind::Tuple;
  v.payload_ = std::make_shared<const std::vector<Value>>(std::move(elements));
  return v;
}

Value Value::record(std::vector<Field> fields) {
  std::sort(fields.begin(), fields.end(),
            [](const Field& a, const Field& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (fields[i - 1].first == fields[i].first) {
      throw Error(ErrorKind::TypeMismatch, "duplicate record field '" + fields[i].first + "'");
    }
  }
  Value v;
  v.kind_ = Kind::Record;
  v.payload_ = std::make_shared<const std::vector<Field>>(std::move(fields));
  return v;
}

Value Value::opaque(std::string bytes, std::string origin) {
  Value v;
  v.kind_ = Kind::Opaque;
  v.payload_ = std::make_shared<const Opaque>(Opaque{std::move(bytes), std::move(origin)});
  return v;
}

Value Value::any() {
  Value v;
  v.kind_ = Kind::Any;
  return v;
}

const std::vector<Value>& Value::tuple_ref() const {
  return *static_cast<const std::vector<Value>*>(payload_.get());
}

const std::vector<Value::Field>& Value::record_ref() const {
  return *static_cast<const std::vector<Field>*>(payload_.get());
}

const Value::Opaque& Value::opaque_ref() const {
  return *static_cast<const Opaque*>(payload_.get());
}

bool Value::as_bool() const {
  if (kind_ != Kind::Bool) {
    throw Error(ErrorKind::TypeMismatch, "expected bool, got " + std::string(to_string(kind_)));
  }
  return scalar_ != 0;
}

std::uint64_t Value::as_nat() const {
  if (kind_ != Kind::Nat) {
    throw Error(ErrorKind::TypeMismatch, "expected nat, got " + std::string(to_string(kind_)));
  }
  return scalar_;
}

std::span<const Value> Value::elements() const {
  if (kind_ != Kind::Tuple) {
    throw Error(ErrorKind::TypeMismatch, "expected tuple, got " + std::string(to_string(kind_)));
  }
  return tuple_ref();
}

std::span<const Value::Field> Value::fields() const {
  if (kind_ != Kind::Record) {
    throw Error(ErrorKind::TypeMismatch, "expected record, got " + std::string(to_string(kind_)));
  }
  return record_ref();
}

const Value* Value::field(std::string_view name) const {
  if (kind_ != Kind::Record) return nullptr;
  const auto& fs = record_ref();
  auto it = std::lower_bound(fs.begin(), fs.end(), name,
                             [](const Field& f, std::string_view n) { return f.first < n; });
  if (it == fs.end() || it->first != name) return nullptr;
  return &it->second;
}

Value Value::with_field(std::string_view name, Value v) const {
  std::vector<Field> fs(fields().begin(), fields().end());
  auto it = std::lower_bound(fs.begin(), fs.end(), name,
                             [](const Field& f, std::string_view n) { return f.first < n; });
  if (it != fs.end() && it->first == name) {
    it->second = std::move(v);
  } else {
    fs.insert(it, Field{std::string(name), std::move(v)});
  }
  Value out;
  out.kind_ = Kind::Record;
  out.payload_ = std::make_shared<const std::vector<Field>>(std::move(fs));
  return out;
}

const std::string& Value::bytes() const {
  if (kind_ != Kind::Opaque) {
    throw Error(ErrorKind::TypeMismatch, "expected opaque, got " + std::string(to_string(kind_)));
  }
  return opaque_ref().bytes;
}

const std::string& Value::origin() const {
  if (kind_ != Kind::Opaque) {
    throw Error(ErrorKind::TypeMismatch, "expected opaque, got " + std::string(to_string(kind_)));
  }
  return opaque_ref().origin;
}

std::uint64_t Value::hash() const {
  std::uint64_t h = hash_mix(kFnvOffset, static_cast<std::uint64_t>(kind_));
  switch (kind_) {
    case Kind::Unit:
    case Kind::Any:
      return h;
    case Kind::Bool:
    case Kind::Nat:
      return hash_mix(h, scalar_);
    case Kind::Tuple:
      for (const auto& e : tuple_ref()) h = hash_mix(h, e.hash());
      return hash_mix(h, tuple_ref().size());
    case Kind::Record:
      for (const auto& [name, e] : record_ref()) {
        h = hash_bytes(h, name);
        h = hash_mix(h, e.hash());
      }
      return hash_mix(h, record_ref().size());
    case Kind::Opaque:
      return hash_bytes(h, opaque_ref().bytes);
  }
  return h;
}

bool operator==(const Value& a, const Value& b) {
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
  switch (a.kind_) {
    case Value::Kind::Unit:
    case Value::Kind::Any:
      return std::strong_ordering::equal;
    case Value::Kind::Bool:
    case Value::Kind::Nat:
      return a.scalar_ <=> b.scalar_;
    case Value::Kind::Tuple: {
      if (a.payload_ == b.payload_) return std::strong_ordering::equal;
      const auto& x = a.tuple_ref();
      const auto& y = b.tuple_ref();
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (auto c = x[i] <=> y[i]; c != 0) return c;
      }
      return x.size() <=> y.size();
    }
    case Value::Kind::Record: {
      if (a.payload_ == b.payload_) return std::strong_ordering::equal;
      const auto& x = a.record_ref();
      const auto& y = b.record_ref();
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (auto c = x[i].first.compare(y[i].first); c != 0) {
          return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        if (auto c = x[i].second <=> y[i].second; c != 0) return c;
      }
      return x.size() <=> y.size();
    }
    case Value::Kind::Opaque: {
      int c = a.opaque_ref().bytes.compare(b.opaque_ref().bytes);
      if (c == 0) return std::strong_ordering::equal;
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
  }
  return std::strong_ordering::equal;
}

const char* to_string(Value::Kind kind) {
  switch (kind) {
    case Value::Kind::Unit: return "unit";
    case Value::Kind::Bool: return "bool";
    case Value::Kind::Nat: return "nat";
    case Value::Kind::Tuple: return "tuple";
    case Value::Kind::Record: return "record";
    case Value::Kind::Opaque: return "opaque";
    case Value::Kind::Any: return "any";
  }
  return "?";
}

std::string to_string(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Unit: return "unit";
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::Nat: return std::to_string(v.as_nat());
    case Value::Kind::Any: return "ANY";
    case Value::Kind::Opaque: return "opaque(\"" + escape_bytes(v.bytes()) + "\")";
    case Value::Kind::Tuple: {
      auto es = v.elements();
      std::string out = "(";
      for (std::size_t i = 0; i < es.size(); ++i) {
        if (i) out += ", ";
        out += to_string(es[i]);
      }
      if (es.size() == 1) out += ",";
      return out + ")";
    }
    case Value::Kind::Record: {
      std::string out = "{";
      bool first = true;
      for (const auto& [name, e] : v.fields()) {
        if (!first) out += ", ";
        first = false;
        out += name + " = " + to_string(e);
      }
      return out + "}";
    }
  }
  return "?";
}

bool loose_equal(const Value& a, const Value& b) {
  if (a.is(Value::Kind::Any) || b.is(Value::Kind::Any)) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::Tuple: {
      auto x = a.elements();
      auto y = b.elements();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!loose_equal(x[i], y[i])) return false;
      }
      return true;
    }
    case Value::Kind::Record: {
      auto x = a.fields();
      auto y = b.fields();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].first != y[i].first || !loose_equal(x[i].second, y[i].second)) return false;
      }
      return true;
    }
    default:
      return a == b;
  }
}

Value project(const Value& v, std::span<const std::string> keys) {
  if (keys.empty() || !v.is(Value::Kind::Record)) return v;
  std::vector<Value::Field> out;
  for (const auto& k : keys) {
    if (const Value* f = v.field(k)) out.emplace_back(k, *f);
  }
  return Value::record(std::move(out));
}

const char* to_string(Color c) {
  switch (c) {
    case Color::Any: return "any";
    case Color::Unit: return "unit";
    case Color::Bool: return "bool";
    case Color::Nat: return "nat";
    case Color::Tuple: return "tuple";
    case Color::Record: return "record";
    case Color::Opaque: return "opaque";
  }
  return "?";
}

std::optional<Color> color_from_string(std::string_view s) {
  for (Color c : {Color::Any, Color::Unit, Color::Bool, Color::Nat, Color::Tuple, Color::Record,
                  Color::Opaque}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

bool admits(Color c, const Value& v) {
  switch (c) {
    case Color::Any: return true;
    case Color::Unit: return v.is(Value::Kind::Unit);
    case Color::Bool: return v.is(Value::Kind::Bool);
    case Color::Nat: return v.is(Value::Kind::Nat);
    case Color::Tuple: return v.is(Value::Kind::Tuple);
    case Color::Record: return v.is(Value::Kind::Record);
    case Color::Opaque: return v.is(Value::Kind::Opaque);
  }
  return false;
}

std::string to_string(const Binding& b) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [k, v] : b) {
    if (!first) os << ", ";
    first = false;
    os << k << " -> " << to_string(v);
  }
  os << "}";
  return os.str();
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::OpaqueInspection: return "OpaqueInspection";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::ConditionNotBoolean: return "ConditionNotBoolean";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::UnresolvedChoice: return "UnresolvedChoice";
    case ErrorKind::ColorMismatch: return "ColorMismatch";
    case ErrorKind::NotServiceable: return "NotServiceable";
    case ErrorKind::InvalidNet: return "InvalidNet";
    case ErrorKind::CompoundKindMismatch: return "CompoundKindMismatch";
    case ErrorKind::CompoundColorMismatch: return "CompoundColorMismatch";
    case ErrorKind::TargetPlaceMissing: return "TargetPlaceMissing";
    case ErrorKind::InvalidLocation: return "InvalidLocation";
    case ErrorKind::InvalidFragment: return "InvalidFragment";
    case ErrorKind::UnknownPlace: return "UnknownPlace";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::UnsupportedPattern: return "UnsupportedPattern";
    case ErrorKind::BindingSearchBudgetExceeded: return "BindingSearchBudgetExceeded";
    case ErrorKind::StaleCandidate: return "StaleCandidate";
    case ErrorKind::RankCountTooSmall: return "RankCountTooSmall";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::UnknownCall: return "UnknownCall";
    case ErrorKind::MissingArgument: return "MissingArgument";
    case ErrorKind::Format: return "FormatError";
  }
  return "Error";
}

namespace {
std::string syntax_message(SourcePos pos, const std::string& message,
                           const std::vector<std::string>& expected) {
  std::ostringstream os;
  os << pos.line << ":" << pos.column << ": " << message;
  if (!expected.empty()) {
    os << " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) os << ", ";
      os << expected[i];
    }
    os << ")";
  }
  return os.str();
}
}  // namespace

SyntaxError::SyntaxError(SourcePos pos, const std::string& message,
                         std::vector<std::string> expected)
    : Error(ErrorKind::Syntax, syntax_message(pos, message, expected)),
      pos_(pos),
      expected_(std::move(expected)) {}

}  // namespace mpnet
