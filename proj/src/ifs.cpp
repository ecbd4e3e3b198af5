#include "fastbasin/ifs.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fastbasin/error.hpp"

namespace fastbasin {

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

[[noreturn]] void syntax_error(std::size_t line_no, const std::string& message) {
  throw Error(ErrorKind::Syntax, "line " + std::to_string(line_no) + ": " + message);
}

double parse_number(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    syntax_error(line_no, "expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

std::vector<double> parse_numbers(const std::vector<std::string_view>& tokens, std::size_t first,
                                  std::size_t count, std::size_t line_no, std::string_view what) {
  if (tokens.size() != first + count) {
    syntax_error(line_no, std::string(what) + " expects " + std::to_string(count) + " numbers, got " +
                              std::to_string(tokens.size() - first));
  }
  std::vector<double> values;
  values.reserve(count);
  for (std::size_t k = first; k < tokens.size(); ++k) values.push_back(parse_number(tokens[k], line_no));
  return values;
}

ModelSpace parse_space(std::string_view token, std::size_t line_no) {
  if (token == "plane2") return ModelSpace::Plane2;
  if (token == "line1ext") return ModelSpace::ExtendedLine;
  if (token == "cplane2") return ModelSpace::ComplexPlane2;
  if (token == "strip2") return ModelSpace::Strip2;
  syntax_error(line_no, "unknown space '" + std::string(token) + "'");
}

Box parse_box(const std::vector<std::string_view>& tokens, std::size_t line_no) {
  const auto v = parse_numbers(tokens, 1, 4, line_no, tokens[0]);
  Box box{v[0], v[1], v[2], v[3]};
  if (!(box.xmax > box.xmin) || !(box.ymax >= box.ymin)) {
    syntax_error(line_no, "window must satisfy xmin < xmax and ymin <= ymax");
  }
  return box;
}

}  // namespace

Word operator+(const Word& u, const Word& v) {
  Word out = u;
  out.indices.insert(out.indices.end(), v.indices.begin(), v.indices.end());
  return out;
}

Word parse_word(std::string_view text) {
  Word word;
  std::string cleaned(text);
  for (char& ch : cleaned) {
    if (ch == ',') ch = ' ';
  }
  for (const auto token : tokenize(cleaned)) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value < 1) {
      throw Error(ErrorKind::InvalidArgument, "bad word index '" + std::string(token) + "'");
    }
    word.indices.push_back(value);
  }
  return word;
}

std::string to_string(const Word& word) {
  std::string out;
  for (std::size_t k = 0; k < word.indices.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(word.indices[k]);
  }
  return out;
}

const MapSpec& IfsSystem::map(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > maps.size()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "map index " + std::to_string(index) + " not in 1.." + std::to_string(maps.size()));
  }
  return maps[static_cast<std::size_t>(index - 1)];
}

bool IfsSystem::all_total() const {
  for (const auto& m : maps) {
    if (!is_total(m)) return false;
  }
  return true;
}

bool IfsSystem::all_affine() const {
  for (const auto& m : maps) {
    if (!std::holds_alternative<Affine2>(m)) return false;
  }
  return true;
}

IfsSystem make_ifs(std::string name, ModelSpace space, std::vector<MapSpec> maps) {
  if (maps.empty()) throw Error(ErrorKind::InvalidArgument, "an IFS needs at least one map");
  if (maps.size() > kMaxMaps) {
    throw Error(ErrorKind::InvalidArgument, "an IFS has at most " + std::to_string(kMaxMaps) + " maps");
  }
  for (const auto& m : maps) {
    if (native_space(m) != space) {
      throw Error(ErrorKind::MixedSpaces, std::string("map family does not live on space ") + to_string(space));
    }
    validate(m);
  }
  IfsSystem ifs;
  ifs.name = std::move(name);
  ifs.space = space;
  ifs.maps = std::move(maps);
  return ifs;
}

IfsSystem parse_ifs(std::string_view config_text) {
  std::optional<ModelSpace> space;
  std::string name;
  std::vector<MapSpec> maps;
  std::optional<Box> window;
  std::optional<Box> attractor_window;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= config_text.size()) {
    const std::size_t end = std::min(config_text.find('\n', pos), config_text.size());
    std::string_view line = config_text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = tokenize(line);
    if (tokens.empty()) {
      if (end == config_text.size()) break;
      continue;
    }

    const auto directive = tokens[0];
    if (directive == "space") {
      if (tokens.size() != 2) syntax_error(line_no, "space expects one argument");
      const ModelSpace parsed = parse_space(tokens[1], line_no);
      if (space && *space != parsed) {
        throw Error(ErrorKind::MixedSpaces, "line " + std::to_string(line_no) + ": conflicting space declaration");
      }
      if (!maps.empty() && native_space(maps.front()) != parsed) {
        throw Error(ErrorKind::MixedSpaces,
                    "line " + std::to_string(line_no) + ": space does not match the maps declared before it");
      }
      space = parsed;
    } else if (directive == "name") {
      if (tokens.size() < 2) syntax_error(line_no, "name expects a value");
      name.clear();
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        if (k > 1) name += ' ';
        name += tokens[k];
      }
    } else if (directive == "window") {
      window = parse_box(tokens, line_no);
    } else if (directive == "attractor_window") {
      attractor_window = parse_box(tokens, line_no);
    } else if (directive == "map") {
      if (tokens.size() < 2) syntax_error(line_no, "map expects a family");
      const auto family = tokens[1];
      MapSpec map;
      if (family == "affine2") {
        const auto v = parse_numbers(tokens, 2, 6, line_no, "affine2");
        map = Affine2{v[0], v[1], v[2], v[3], v[4], v[5]};
      } else if (family == "moebius1") {
        const auto v = parse_numbers(tokens, 2, 4, line_no, "moebius1");
        map = Moebius1{v[0], v[1], v[2], v[3]};
      } else if (family == "caffine2") {
        const auto v = parse_numbers(tokens, 2, 10, line_no, "caffine2");
        map = ComplexAffine2{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}, {v[8], v[9]}};
      } else if (family == "halfsqrt") {
        const auto v = parse_numbers(tokens, 2, 1, line_no, "halfsqrt");
        map = HalfSqrt{v[0]};
      } else {
        syntax_error(line_no, "unknown map family '" + std::string(family) + "'");
      }
      const ModelSpace expected = space.value_or(ModelSpace::Plane2);
      if (native_space(map) != expected || (!maps.empty() && native_space(maps.front()) != native_space(map))) {
        throw Error(ErrorKind::MixedSpaces, "line " + std::to_string(line_no) + ": map family " +
                                                std::string(family) + " does not live on space " +
                                                to_string(expected));
      }
      try {
        validate(map);
      } catch (const Error& e) {
        throw Error(ErrorKind::SingularMap, "line " + std::to_string(line_no) + ": " + e.what());
      }
      maps.push_back(map);
    } else {
      syntax_error(line_no, "unknown directive '" + std::string(directive) + "'");
    }
    if (end == config_text.size()) break;
  }

  if (maps.empty()) throw Error(ErrorKind::Syntax, "config declares no maps");
  IfsSystem ifs = make_ifs(name.empty() ? std::string("ifs") : name, space.value_or(ModelSpace::Plane2),
                           std::move(maps));
  ifs.window = window;
  ifs.attractor_window = attractor_window;
  return ifs;
}

IfsSystem load_ifs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open IFS config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    IfsSystem ifs = parse_ifs(buffer.str());
    if (ifs.name == "ifs") ifs.name = path.stem().string();
    return ifs;
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_config(const IfsSystem& ifs) {
  std::ostringstream os;
  os.precision(17);
  os << "name " << ifs.name << '\n' << "space " << to_string(ifs.space) << '\n';
  for (const auto& m : ifs.maps) {
    if (const auto* a = std::get_if<Affine2>(&m)) {
      os << "map affine2 " << a->a << ' ' << a->b << ' ' << a->c << ' ' << a->d << ' ' << a->tx << ' ' << a->ty;
    } else if (const auto* mb = std::get_if<Moebius1>(&m)) {
      os << "map moebius1 " << mb->p << ' ' << mb->q << ' ' << mb->r << ' ' << mb->s;
    } else if (const auto* c = std::get_if<ComplexAffine2>(&m)) {
      os << "map caffine2";
      for (const auto& v : {c->m11, c->m21, c->m22, c->t1, c->t2}) os << ' ' << v.real() << ' ' << v.imag();
    } else if (const auto* hs = std::get_if<HalfSqrt>(&m)) {
      os << "map halfsqrt " << hs->tx;
    }
    os << '\n';
  }
  const auto box_line = [&](const char* key, const Box& b) {
    os << key << ' ' << b.xmin << ' ' << b.ymin << ' ' << b.xmax << ' ' << b.ymax << '\n';
  };
  if (ifs.window) box_line("window", *ifs.window);
  if (ifs.attractor_window) box_line("attractor_window", *ifs.attractor_window);
  return os.str();
}

Point apply_word(const IfsSystem& ifs, const Word& word, const Point& x) {
  Point y = x;
  for (auto it = word.indices.rbegin(); it != word.indices.rend(); ++it) y = fastbasin::apply(ifs.map(*it), y);
  return y;
}

Point apply_inverse_word(const IfsSystem& ifs, const Word& word, const Point& y) {
  Point x = y;
  for (auto it = word.indices.rbegin(); it != word.indices.rend(); ++it) x = apply_inverse(ifs.map(*it), x);
  return x;
}

Point fixed_point(const IfsSystem& ifs, int index) {
  const MapSpec& map = ifs.map(index);
  if (const auto* m = std::get_if<Affine2>(&map)) {
    // (I - M) x = t
    const double a = 1.0 - m->a, b = -m->b, c = -m->c, d = 1.0 - m->d;
    const double det = a * d - b * c;
    if (det == 0.0) throw Error(ErrorKind::NotFound, "affine map has no isolated fixed point");
    return Point::plane((d * m->tx - b * m->ty) / det, (a * m->ty - c * m->tx) / det);
  }
  if (const auto* m = std::get_if<ComplexAffine2>(&map)) {
    if (m->m11 == 1.0 || m->m22 == 1.0) throw Error(ErrorKind::NotFound, "map has no isolated fixed point");
    const auto z = m->t1 / (1.0 - m->m11);
    const auto w = (m->m21 * z + m->t2) / (1.0 - m->m22);
    return Point::complex(z, w);
  }
  if (const auto* m = std::get_if<Moebius1>(&map)) {
    // r x^2 + (s - p) x - q = 0; keep the root with |w'| < 1 when there is one.
    if (m->r == 0.0) {
      if (m->s == m->p) return Point::infinity();
      return Point::line(m->q / (m->s - m->p));
    }
    const double bq = m->s - m->p;
    const double disc = bq * bq + 4.0 * m->r * m->q;
    if (disc < 0.0) throw Error(ErrorKind::NotFound, "moebius map has no real fixed point");
    const double root = std::sqrt(disc);
    const double x1 = (-bq + root) / (2.0 * m->r);
    const double x2 = (-bq - root) / (2.0 * m->r);
    const auto slope = [&](double x) {
      const double den = m->r * x + m->s;
      return std::abs(m->det()) / (den * den);
    };
    return Point::line(slope(x1) <= slope(x2) ? x1 : x2);
  }
  throw Error(ErrorKind::Unsupported, "fixed points of halfsqrt maps are not computed");
}

}  // namespace fastbasin
