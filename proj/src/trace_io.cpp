#include <array>
#include <istream>
#include <ostream>

#include "sparsemis/mis.hpp"

namespace sparsemis {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'M', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <class T>
T get(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw Error("truncated trace fixture");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

void put_set(std::ostream& out, const NodeSet& s) {
  const auto members = s.members();
  put<std::uint64_t>(out, members.size());
  for (NodeId v : members) put<std::uint32_t>(out, v);
}

NodeSet get_set(std::istream& in, std::size_t n) {
  NodeSet s(n);
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto v = get<std::uint32_t>(in);
    if (v >= n) throw Error("trace fixture node id out of range");
    s.insert(v);
  }
  return s;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ExecutionTrace& trace) {
  out << "iteration,node,p_num,p_exp,dhat,sampled,marked,stalled,status\n";
  for (const TraceRow& r : trace.rows)
    out << r.iteration << ',' << r.node << ",1," << static_cast<int>(r.p_exp) << ',' << r.dhat << ',' << r.sampled
        << ',' << (r.marked ? 1 : 0) << ',' << (r.stalled ? 1 : 0) << ',' << to_string(r.status) << '\n';
}

void write_trace_binary(std::ostream& out, const ExecutionTrace& trace) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, trace.node_count);
  put<std::uint32_t>(out, trace.iterations);
  put<std::uint32_t>(out, trace.executed);
  put<std::uint64_t>(out, trace.rows.size());
  for (const TraceRow& r : trace.rows) {
    put<std::uint32_t>(out, r.iteration);
    put<std::uint32_t>(out, r.node);
    put<std::uint8_t>(out, r.p_exp);
    put<std::uint32_t>(out, r.dhat);
    put<std::uint16_t>(out, r.sampled);
    put<std::uint8_t>(out, static_cast<std::uint8_t>((r.marked ? 1 : 0) | (r.stalled ? 2 : 0)));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.status));
  }
  put_set(out, trace.mis);
  put_set(out, trace.survivors);
  put_set(out, trace.post_shatter_joined);
  put<std::uint8_t>(out, trace.post_shattered ? 1 : 0);
}

ExecutionTrace read_trace_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("not a trace fixture");
  if (get<std::uint32_t>(in) != kVersion) throw Error("unsupported trace fixture version");
  ExecutionTrace t;
  t.node_count = get<std::uint64_t>(in);
  t.iterations = get<std::uint32_t>(in);
  t.executed = get<std::uint32_t>(in);
  const auto rows = get<std::uint64_t>(in);
  t.rows.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    TraceRow r;
    r.iteration = get<std::uint32_t>(in);
    r.node = get<std::uint32_t>(in);
    r.p_exp = get<std::uint8_t>(in);
    r.dhat = get<std::uint32_t>(in);
    r.sampled = get<std::uint16_t>(in);
    const auto flags = get<std::uint8_t>(in);
    r.marked = flags & 1;
    r.stalled = flags & 2;
    const auto status = get<std::uint8_t>(in);
    if (status > 3) throw Error("bad status in trace fixture");
    r.status = static_cast<Status>(status);
    t.rows.push_back(r);
  }
  t.mis = get_set(in, t.node_count);
  t.survivors = get_set(in, t.node_count);
  t.post_shatter_joined = get_set(in, t.node_count);
  t.post_shattered = get<std::uint8_t>(in) != 0;
  return t;
}

}  // namespace sparsemis
