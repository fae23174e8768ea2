#include "sqlbound/value.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace sqlbound {

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return "integer";
    case ColumnType::Real: return "real";
    case ColumnType::Text: return "text";
    case ColumnType::Date: return "date";
  }
  return "?";
}

std::optional<ColumnType> column_type_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "integer" || lower == "int") return ColumnType::Integer;
  if (lower == "real" || lower == "float" || lower == "double") return ColumnType::Real;
  if (lower == "text" || lower == "varchar" || lower == "string") return ColumnType::Text;
  if (lower == "date") return ColumnType::Date;
  return std::nullopt;
}

namespace {

// Howard Hinnant's civil calendar algorithms (days relative to 1970-01-01).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

const std::int64_t kOriginOffset = days_from_civil(1, 1, 1);

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

std::optional<std::int64_t> parse_iso_date(std::string_view text) {
  // YYYY-MM-DD, optionally followed by a time part which is ignored.
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
  if (text.size() > 10 && text[10] != ' ' && text[10] != 'T') return std::nullopt;
  const std::int64_t y = std::stoll(std::string(text.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(text.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(text.substr(8, 2))));
  static constexpr unsigned kMonthDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (y < 1 || m < 1 || m > 12 || d < 1) return std::nullopt;
  const unsigned limit = kMonthDays[m - 1] + (m == 2 && is_leap(y) ? 1 : 0);
  if (d > limit) return std::nullopt;
  return days_from_civil(y, m, d) - kOriginOffset;
}

std::string format_iso_date(std::int64_t days) {
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days + kOriginOffset, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

std::string format_rational(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  BigInt rest = den;
  int twos = 0, fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();
  const int digits = std::max(twos, fives);
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const BigInt scaled = num * (scale / den);
  const bool negative = scaled < 0;
  std::string s = (negative ? BigInt(-scaled) : scaled).str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  return negative ? "-" + s : s;
}

std::optional<Rational> parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto n = parse_rational(text.substr(0, slash));
    auto d = parse_rational(text.substr(slash + 1));
    if (!n || !d || *d == 0) return std::nullopt;
    return *n / *d;
  }
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    ++i;
  }
  BigInt mantissa = 0;
  int frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa = mantissa * 10 + (c - '0');
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if ((c == 'e' || c == 'E') && seen_digit) {
      const std::string exp_text(text.substr(i + 1));
      if (exp_text.empty()) return std::nullopt;
      char* end = nullptr;
      const long exp = std::strtol(exp_text.c_str(), &end, 10);
      if (*end != '\0') return std::nullopt;
      frac_digits -= static_cast<int>(exp);
      break;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  Rational value(mantissa);
  BigInt scale = 1;
  for (int k = 0; k < std::abs(frac_digits); ++k) scale *= 10;
  value = frac_digits >= 0 ? value / Rational(scale) : value * Rational(scale);
  return negative ? Rational(-value) : value;
}

Value Value::integer(BigInt v) {
  Value out;
  out.kind_ = Kind::Integer;
  out.number_ = Rational(std::move(v));
  return out;
}

Value Value::real(Rational v) {
  Value out;
  out.kind_ = Kind::Real;
  out.number_ = std::move(v);
  return out;
}

Value Value::text(std::string v) {
  Value out;
  out.kind_ = Kind::Text;
  out.text_ = std::move(v);
  return out;
}

Value Value::date(std::int64_t days) {
  Value out;
  out.kind_ = Kind::Date;
  out.number_ = Rational(days);
  return out;
}

Value Value::of_type(ColumnType type, const Rational& number) {
  switch (type) {
    case ColumnType::Integer:
      if (boost::multiprecision::denominator(number) != 1) throw ValueError("non-integral value for integer column");
      return integer(boost::multiprecision::numerator(number));
    case ColumnType::Real: return real(number);
    case ColumnType::Date:
      if (boost::multiprecision::denominator(number) != 1) throw ValueError("non-integral day count");
      return date(static_cast<std::int64_t>(boost::multiprecision::numerator(number)));
    case ColumnType::Text: break;
  }
  throw ValueError("numeric payload for text column");
}

const Rational& Value::number() const {
  if (kind_ != Kind::Integer && kind_ != Kind::Real && kind_ != Kind::Date)
    throw ValueError("value is not numeric");
  return number_;
}

const std::string& Value::str() const {
  if (kind_ != Kind::Text) throw ValueError("value is not text");
  return text_;
}

std::int64_t Value::days() const {
  if (kind_ != Kind::Date) throw ValueError("value is not a date");
  return static_cast<std::int64_t>(boost::multiprecision::numerator(number_));
}

std::string Value::to_sql() const {
  switch (kind_) {
    case Kind::Null: return "NULL";
    case Kind::Integer: return boost::multiprecision::numerator(number_).str();
    case Kind::Real: {
      std::string s = format_rational(number_);
      if (s.find('/') != std::string::npos) {
        const BigInt n = boost::multiprecision::numerator(number_);
        const BigInt d = boost::multiprecision::denominator(number_);
        return "(" + n.str() + ".0 / " + d.str() + ")";
      }
      if (s.find('.') == std::string::npos) s += ".0";
      return s;
    }
    case Kind::Text: {
      std::string out = "'";
      for (char c : text_) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
    case Kind::Date: return "'" + format_iso_date(days()) + "'";
  }
  return "NULL";
}

std::string Value::to_display() const {
  switch (kind_) {
    case Kind::Null: return "NULL";
    case Kind::Text: return text_;
    case Kind::Date: return format_iso_date(days());
    case Kind::Integer:
    case Kind::Real: return format_rational(number_);
  }
  return "";
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Value::Kind::Null: return true;
    case Value::Kind::Text: return a.text_ == b.text_;
    default: return a.number_ == b.number_;
  }
}

namespace {
int kind_rank(Value::Kind k) {
  switch (k) {
    case Value::Kind::Null: return 0;
    case Value::Kind::Integer:
    case Value::Kind::Real: return 1;
    case Value::Kind::Date: return 2;
    case Value::Kind::Text: return 3;
  }
  return 4;
}
}  // namespace

bool same_value(const Value& a, const Value& b) { return total_order(a, b) == std::strong_ordering::equal; }

std::strong_ordering total_order(const Value& a, const Value& b) {
  const int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
  if (ra != rb) return ra <=> rb;
  switch (ra) {
    case 0: return std::strong_ordering::equal;
    case 3: return a.str().compare(b.str()) <=> 0;
    default: {
      const Rational& x = a.number();
      const Rational& y = b.number();
      if (x < y) return std::strong_ordering::less;
      if (y < x) return std::strong_ordering::greater;
      return std::strong_ordering::equal;
    }
  }
}

Value parse_cell(ColumnType type, std::string_view text) {
  switch (type) {
    case ColumnType::Text: return Value::text(std::string(text));
    case ColumnType::Date: {
      if (auto days = parse_iso_date(text)) return Value::date(*days);
      throw ValueError("invalid date '" + std::string(text) + "'");
    }
    case ColumnType::Integer: {
      auto r = parse_rational(text);
      if (!r || boost::multiprecision::denominator(*r) != 1)
        throw ValueError("invalid integer '" + std::string(text) + "'");
      return Value::integer(boost::multiprecision::numerator(*r));
    }
    case ColumnType::Real: {
      auto r = parse_rational(text);
      if (!r) throw ValueError("invalid real '" + std::string(text) + "'");
      return Value::real(*r);
    }
  }
  throw ValueError("unknown column type");
}

}  // namespace sqlbound
