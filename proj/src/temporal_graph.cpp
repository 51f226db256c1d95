#include "dwlkit/temporal_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dwlkit {

DynamicGraph::DynamicGraph(std::size_t node_count, std::vector<Event> events,
                           Matrix node_features, Matrix edge_features)
    : node_count_(node_count), events_(std::move(events)) {
  if (node_count_ > std::numeric_limits<NodeId>::max()) {
    throw std::invalid_argument("node count exceeds id range");
  }
  for (const Event& e : events_) {
    if (e.src >= node_count_ || e.dst >= node_count_) {
      throw std::invalid_argument("event endpoint out of range");
    }
    if (!std::isfinite(e.time) || e.time < 0.0) {
      throw std::invalid_argument("event time must be finite and non-negative");
    }
  }
  if (node_features.size() == 0) {
    node_features_ = Matrix::Zero(static_cast<Eigen::Index>(node_count_), 1);
  } else {
    if (static_cast<std::size_t>(node_features.rows()) != node_count_) {
      throw std::invalid_argument("node feature rows must equal node count");
    }
    node_features_ = std::move(node_features);
  }
  if (edge_features.size() == 0) {
    edge_features_ = Matrix::Zero(static_cast<Eigen::Index>(events_.size()), 1);
  } else {
    edge_features_ = std::move(edge_features);
  }
  for (const Event& e : events_) {
    if (e.edge_feature_index && *e.edge_feature_index >= static_cast<std::size_t>(edge_features_.rows())) {
      throw std::invalid_argument("edge feature index out of range");
    }
  }

  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });

  // CSR incidence index; events are already time sorted so each row is too.
  std::vector<std::size_t> degree(node_count_ + 1, 0);
  for (const Event& e : events_) {
    ++degree[e.src];
    if (e.dst != e.src) ++degree[e.dst];
  }
  incidence_offsets_.assign(node_count_ + 1, 0);
  for (std::size_t u = 0; u < node_count_; ++u) {
    incidence_offsets_[u + 1] = incidence_offsets_[u] + degree[u];
  }
  incidences_.resize(incidence_offsets_.back());
  std::vector<std::size_t> cursor(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    incidences_[cursor[e.src]++] = {e.dst, e.time, i};
    if (e.dst != e.src) incidences_[cursor[e.dst]++] = {e.src, e.time, i};
  }
}

Eigen::RowVectorXd DynamicGraph::edge_feature(const Event& e) const {
  if (!e.edge_feature_index) return Eigen::RowVectorXd::Zero(edge_features_.cols());
  return edge_features_.row(static_cast<Eigen::Index>(*e.edge_feature_index));
}

std::span<const Incidence> DynamicGraph::incidences(NodeId u) const {
  if (u >= node_count_) throw std::out_of_range("node id out of range");
  return std::span<const Incidence>(incidences_).subspan(
      incidence_offsets_[u], incidence_offsets_[u + 1] - incidence_offsets_[u]);
}

double DynamicGraph::max_time() const { return events_.empty() ? 0.0 : events_.back().time; }

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

NodeId parse_id(std::string_view field, std::size_t line) {
  field = trim(field);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec == std::errc::result_out_of_range) throw ParseError(line, "node id overflow");
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line, "malformed node id '" + std::string(field) + "'");
  }
  // The last id is reserved so that node_count = 1 + max id stays representable.
  if (value >= std::numeric_limits<NodeId>::max()) throw ParseError(line, "node id overflow");
  return static_cast<NodeId>(value);
}

double parse_real(std::string_view field, std::size_t line, const char* what) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line, std::string("non-finite ") + what);
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, bool comma) {
  std::vector<std::string_view> out;
  if (comma) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == '\r')) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

}  // namespace

DynamicGraph load_events(std::istream& in, EventFormat format) {
  std::vector<Event> events;
  std::vector<std::vector<double>> features;
  std::size_t feature_dim = 0;
  bool have_feature_dim = false;
  NodeId max_id = 0;
  bool any = false;
  std::size_t declared_nodes = 0;

  std::string raw;
  std::size_t line_no = 0;
  bool header_pending = format == EventFormat::jodie_csv;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (format == EventFormat::edge_list && line.front() == '#') {
      // "# nodes N" keeps isolated trailing nodes across a write/load cycle.
      std::istringstream directive{std::string(line.substr(1))};
      std::string key;
      std::size_t n = 0;
      if (directive >> key >> n && key == "nodes") declared_nodes = n;
      continue;
    }

    const auto fields = split_fields(line, format == EventFormat::jodie_csv);
    Event e;
    if (format == EventFormat::edge_list) {
      if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields 'src dst timestamp'");
      e.src = parse_id(fields[0], line_no);
      e.dst = parse_id(fields[1], line_no);
      e.time = parse_real(fields[2], line_no, "timestamp");
    } else {
      if (fields.size() < 4) throw ParseError(line_no, "expected src,dst,timestamp,state_label[,features]");
      e.src = parse_id(fields[0], line_no);
      e.dst = parse_id(fields[1], line_no);
      e.time = parse_real(fields[2], line_no, "timestamp");
      parse_real(fields[3], line_no, "state label");
      const std::size_t dim = fields.size() - 4;
      if (!have_feature_dim) {
        feature_dim = dim;
        have_feature_dim = true;
      } else if (dim != feature_dim) {
        throw ParseError(line_no, "inconsistent feature count");
      }
      std::vector<double> row(dim);
      for (std::size_t k = 0; k < dim; ++k) row[k] = parse_real(fields[4 + k], line_no, "feature");
      e.edge_feature_index = features.size();
      features.push_back(std::move(row));
    }
    if (e.time < 0.0) throw ParseError(line_no, "negative timestamp");
    max_id = std::max({max_id, e.src, e.dst});
    any = true;
    events.push_back(e);
  }

  const std::size_t node_count =
      std::max(declared_nodes, any ? static_cast<std::size_t>(max_id) + 1 : std::size_t{0});
  Matrix edge_features;
  if (feature_dim > 0) {
    edge_features.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(feature_dim));
    for (std::size_t r = 0; r < features.size(); ++r) {
      for (std::size_t c = 0; c < feature_dim; ++c) {
        edge_features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = features[r][c];
      }
    }
  } else {
    // Featureless rows still reference the zero table.
    for (auto& e : events) e.edge_feature_index.reset();
  }
  return DynamicGraph(node_count, std::move(events), Matrix(), std::move(edge_features));
}

DynamicGraph load_events_file(const std::string& path, EventFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_events(in, format);
}

EventFormat parse_event_format(const std::string& name) {
  if (name == "jodie_csv" || name == "jodie") return EventFormat::jodie_csv;
  if (name == "edge_list") return EventFormat::edge_list;
  throw std::invalid_argument("unknown event format '" + name + "'");
}

void write_edge_list(std::ostream& out, const DynamicGraph& g) {
  std::ostringstream buf;
  buf.precision(17);
  // Isolated trailing nodes are not representable in the format; record the count.
  buf << "# nodes " << g.node_count() << '\n';
  for (const Event& e : g.events()) buf << e.src << ' ' << e.dst << ' ' << e.time << '\n';
  out << buf.str();
}

Dat::Dat(const DynamicGraph& g) {
  for (const Event& e : g.events()) {
    auto& seq = pairs_[pair_key(e.src, e.dst)];
    seq.push_back(e.time);
    depth_ = std::max(depth_, seq.size());
  }
}

std::span<const double> Dat::timestamps(NodeId u, NodeId v) const {
  const auto it = pairs_.find(pair_key(u, v));
  if (it == pairs_.end()) return {};
  return it->second;
}

std::span<const double> Dat::before(NodeId u, NodeId v, double t) const {
  const auto seq = timestamps(u, v);
  const auto end = std::lower_bound(seq.begin(), seq.end(), t);
  return seq.first(static_cast<std::size_t>(end - seq.begin()));
}

Dat build_dat(const DynamicGraph& g) { return Dat(g); }

std::vector<double> hdat_at(const Dat& dat, NodeId u, NodeId v, double t) {
  std::vector<double> row(dat.depth(), kInf);
  const auto finite = dat.before(u, v, t);
  std::copy(finite.begin(), finite.end(), row.begin());
  return row;
}

std::vector<double> tit_at(const Dat& dat, NodeId u, NodeId v, double t) {
  std::vector<double> row(dat.depth(), kInf);
  const auto finite = dat.before(u, v, t);
  for (std::size_t k = 0; k < finite.size(); ++k) row[k] = t - finite[k];
  return row;
}

HistoricalNeighborhood historical_neighbors(const DynamicGraph& g, NodeId u, double t,
                                            std::size_t limit) {
  HistoricalNeighborhood out;
  out.root = u;
  out.t = t;
  const auto inc = g.incidences(u);
  const auto end = std::lower_bound(inc.begin(), inc.end(), t,
                                    [](const Incidence& a, double value) { return a.time < value; });
  const std::size_t available = static_cast<std::size_t>(end - inc.begin());
  const std::size_t keep = std::min(available, limit);
  out.entries.reserve(keep);
  for (auto it = end - static_cast<std::ptrdiff_t>(keep); it != end; ++it) {
    out.entries.push_back({it->neighbor, it->time, it->event});
  }
  return out;
}

}  // namespace dwlkit
