#include "gna/problems/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gna::problems {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "gna-instance";

std::optional<BitString> optional_bits(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return BitString::from_string(j.at(key).get<std::string>());
}

json planted_json(const Problem& p) {
  const auto plant = p.planted();
  return plant ? json(plant->to_string()) : json(nullptr);
}

}  // namespace

std::string to_dimacs(const ThreeSat& problem) {
  std::ostringstream out;
  out << "c kind 3sat\n";
  out << "c seed " << problem.seed() << "\n";
  if (problem.planted()) out << "c planted " << problem.planted()->to_string() << "\n";
  out << "p cnf " << problem.dimension() << " " << problem.clauses().size() << "\n";
  for (const auto& c : problem.clauses()) {
    for (int k = 0; k < 3; ++k) out << (c.negated[k] ? "-" : "") << (c.var[k] + 1) << " ";
    out << "0\n";
  }
  return out.str();
}

ThreeSat parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::uint64_t seed = 0;
  std::optional<BitString> plant;
  long n = -1, m = -1;
  std::vector<Clause3> clauses;
  std::vector<int> pending;
  auto flush = [&](int lineno) {
    if (pending.size() != 3) {
      throw InstanceFormatError("line " + std::to_string(lineno) + ": clause has " + std::to_string(pending.size()) +
                                " literals, expected 3");
    }
    Clause3 c{};
    for (int k = 0; k < 3; ++k) {
      const int lit = pending[static_cast<std::size_t>(k)];
      if (std::abs(lit) > n) throw InstanceFormatError("line " + std::to_string(lineno) + ": variable out of range");
      c.var[k] = std::abs(lit) - 1;
      c.negated[k] = lit < 0;
    }
    clauses.push_back(c);
    pending.clear();
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "%") break;
    if (head == "c") {
      std::string key, value;
      ls >> key >> value;
      if (key == "seed") seed = std::stoull(value);
      if (key == "planted") plant = BitString::from_string(value);
      continue;
    }
    if (head == "p") {
      std::string fmt;
      if (!(ls >> fmt >> n >> m) || fmt != "cnf" || n < 1 || m < 0) {
        throw InstanceFormatError("line " + std::to_string(lineno) + ": malformed problem line");
      }
      continue;
    }
    if (n < 0) throw InstanceFormatError("line " + std::to_string(lineno) + ": clause before problem line");
    std::istringstream cs(line);
    int lit;
    while (cs >> lit) {
      if (lit == 0) flush(lineno);
      else pending.push_back(lit);
    }
    if (!cs.eof()) throw InstanceFormatError("line " + std::to_string(lineno) + ": non-integer token");
  }
  if (n < 0) throw InstanceFormatError("missing problem line");
  if (!pending.empty()) throw InstanceFormatError("unterminated final clause");
  if (static_cast<long>(clauses.size()) != m) {
    throw InstanceFormatError("problem line declares " + std::to_string(m) + " clauses, found " +
                              std::to_string(clauses.size()));
  }
  try {
    return ThreeSat(static_cast<std::size_t>(n), std::move(clauses), std::move(plant), seed);
  } catch (const std::invalid_argument& e) {
    throw InstanceFormatError(e.what());
  }
}

std::string to_instance_json(const Problem& problem) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kInstanceSchemaVersion;
  doc["kind"] = kind_name(problem.kind());
  doc["n"] = problem.dimension();
  doc["seed"] = problem.seed();
  json payload;
  switch (problem.kind()) {
    case ProblemKind::Ising: {
      const auto& p = static_cast<const IsingSparsification&>(problem);
      payload["lambda"] = p.lambda();
      payload["edges"] = IsingSparsification::edges();
      payload["couplings"] = p.couplings();
      break;
    }
    case ProblemKind::Contamination: {
      const auto& p = static_cast<const ContaminationControl&>(problem);
      payload["replicas"] = ContaminationControl::kReplicas;
      payload["initial"] = p.initial();
      payload["spread"] = p.spread();
      payload["recovery"] = p.recovery();
      break;
    }
    case ProblemKind::ThreeSat: {
      const auto& p = static_cast<const ThreeSat&>(problem);
      json clauses = json::array();
      for (const auto& c : p.clauses()) {
        json lits = json::array();
        for (int k = 0; k < 3; ++k) lits.push_back(c.negated[k] ? -(c.var[k] + 1) : c.var[k] + 1);
        clauses.push_back(lits);
      }
      payload["clauses"] = clauses;
      payload["planted"] = planted_json(p);
      break;
    }
    case ProblemKind::Xorsat: {
      const auto& p = static_cast<const Xorsat&>(problem);
      json clauses = json::array();
      for (const auto& c : p.clauses()) clauses.push_back({c.var[0], c.var[1], c.var[2], c.parity});
      payload["clauses"] = clauses;
      payload["planted"] = planted_json(p);
      break;
    }
    case ProblemKind::SubsetSum: {
      const auto& p = static_cast<const SubsetSum&>(problem);
      json values = json::array();
      for (const auto& a : p.values()) values.push_back(a.str());
      payload["values"] = values;
      payload["target"] = p.target().str();
      payload["planted"] = planted_json(p);
      break;
    }
  }
  doc["payload"] = payload;
  return doc.dump(1) + "\n";
}

ProblemPtr parse_instance_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != kFormat) throw InstanceFormatError("not a gna-instance document");
    if (doc.at("version").get<int>() != kInstanceSchemaVersion) {
      throw InstanceFormatError("unsupported instance schema version " + doc.at("version").dump());
    }
    const auto kind = parse_kind(doc.at("kind").get<std::string>());
    if (!kind) throw InstanceFormatError("unknown problem kind " + doc.at("kind").dump());
    const auto n = doc.at("n").get<std::size_t>();
    const auto seed = doc.at("seed").get<std::uint64_t>();
    const json& p = doc.at("payload");
    ProblemPtr out;
    switch (*kind) {
      case ProblemKind::Ising:
        out = std::make_shared<IsingSparsification>(p.at("couplings").get<std::vector<double>>(),
                                                    p.at("lambda").get<double>(), seed);
        break;
      case ProblemKind::Contamination:
        out = std::make_shared<ContaminationControl>(n, p.at("initial").get<std::vector<double>>(),
                                                     p.at("spread").get<std::vector<double>>(),
                                                     p.at("recovery").get<std::vector<double>>(), seed);
        break;
      case ProblemKind::ThreeSat: {
        std::vector<Clause3> clauses;
        for (const auto& c : p.at("clauses")) {
          Clause3 cl{};
          for (int k = 0; k < 3; ++k) {
            const int lit = c.at(static_cast<std::size_t>(k)).get<int>();
            cl.var[k] = std::abs(lit) - 1;
            cl.negated[k] = lit < 0;
          }
          clauses.push_back(cl);
        }
        out = std::make_shared<ThreeSat>(n, std::move(clauses), optional_bits(p, "planted"), seed);
        break;
      }
      case ProblemKind::Xorsat: {
        std::vector<XorClause> clauses;
        for (const auto& c : p.at("clauses")) {
          clauses.push_back(
              {{c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()}, c.at(3).get<std::uint8_t>()});
        }
        out = std::make_shared<Xorsat>(n, std::move(clauses), optional_bits(p, "planted"), seed);
        break;
      }
      case ProblemKind::SubsetSum: {
        std::vector<BigInt> values;
        for (const auto& a : p.at("values")) values.emplace_back(a.get<std::string>());
        out = std::make_shared<SubsetSum>(std::move(values), BigInt(p.at("target").get<std::string>()),
                                          optional_bits(p, "planted"), seed);
        break;
      }
    }
    if (out->dimension() != n) throw InstanceFormatError("payload size disagrees with n");
    return out;
  } catch (const json::exception& e) {
    throw InstanceFormatError(std::string("malformed instance document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InstanceFormatError(std::string("invalid instance: ") + e.what());
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const InstanceFormatError*>(&e)) throw;
    throw InstanceFormatError(std::string("invalid instance: ") + e.what());
  }
}

std::string serialize_instance(const Problem& problem) {
  if (problem.kind() == ProblemKind::ThreeSat) return to_dimacs(static_cast<const ThreeSat&>(problem));
  return to_instance_json(problem);
}

ProblemPtr parse_instance(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_instance_json(text);
  return std::make_shared<ThreeSat>(parse_dimacs(text));
}

std::string instance_extension(ProblemKind kind) { return kind == ProblemKind::ThreeSat ? ".cnf" : ".json"; }

void write_instance(const std::filesystem::path& path, const Problem& problem) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  out << serialize_instance(problem);
  if (!out) throw std::runtime_error("failed writing instance file " + path.string());
}

ProblemPtr read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read instance file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

}  // namespace gna::problems
