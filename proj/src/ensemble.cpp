#include "cascademl/ensemble.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace cascademl {

std::string to_string(Construction c) { return c == Construction::bagging ? "bagging" : "random_subspace"; }

std::string to_string(Fusion f) { return f == Fusion::majority_vote ? "majority_vote" : "average_probability"; }

Fusion parse_fusion(std::string_view name) {
  if (name == "majority_vote") return Fusion::majority_vote;
  if (name == "average_probability") return Fusion::average_probability;
  throw std::invalid_argument("unknown fusion '" + std::string(name) + "'");
}

MemberModel train_member(const MemberSpec& spec, const DataTable& table, Seed seed) {
  if (const auto* plain = std::get_if<PlainSpec>(&spec)) {
    if (plain->selection) return train_selected(plain->learner, *plain->selection, table, seed);
    return train(plain->learner, table, seed);
  }
  return train_cascade(std::get<CascadeSpec>(spec), table, seed);
}

Distribution predict_member(const MemberModel& model, Instance instance) {
  return std::visit(
      [&](const auto& m) -> Distribution {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TrainedModel>) return predict_distribution(m, instance);
        else if constexpr (std::is_same_v<T, SelectedModel>) return predict_selected(m, instance);
        else return predict_cascade(m, instance);
      },
      model);
}

namespace {

void check_count(int n) {
  if (n < 1) throw std::invalid_argument("ensemble needs at least one member");
}

}  // namespace

EnsembleModel train_bagging(const MemberSpec& spec, const DataTable& table, int n, Seed seed, Fusion fusion) {
  check_count(n);
  EnsembleModel e{Construction::bagging, fusion, table.schema(), table.class_labels(), {}};
  e.members.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Seed member_seed = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    const DataTable sample = bootstrap_sample(table, derive_seed(member_seed, {0}));
    e.members.push_back({train_member(spec, sample, derive_seed(member_seed, {2})), FeatureMask::full(table.attributes())});
  }
  return e;
}

EnsembleModel train_random_subspace(const MemberSpec& spec, const DataTable& table, int n, double fraction, Seed seed,
                                    Fusion fusion) {
  check_count(n);
  EnsembleModel e{Construction::random_subspace, fusion, table.schema(), table.class_labels(), {}};
  e.members.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Seed member_seed = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    FeatureMask mask = random_subspace(table.schema(), fraction, derive_seed(member_seed, {1}));
    e.members.push_back({train_member(spec, project(table, mask), derive_seed(member_seed, {2})), std::move(mask)});
  }
  return e;
}

std::vector<Distribution> member_distributions(const EnsembleModel& ensemble, Instance instance) {
  check_instance(ensemble.schema, instance);
  std::vector<Distribution> out;
  out.reserve(ensemble.members.size());
  for (const auto& m : ensemble.members) {
    if (m.mask.is_full()) out.push_back(predict_member(m.model, instance));
    else out.push_back(predict_member(m.model, project(instance, m.mask)));
  }
  return out;
}

Distribution fuse_distributions(std::span<const Distribution> members, Fusion fusion) {
  if (members.empty()) throw std::invalid_argument("fuse: empty ensemble");
  const double n = static_cast<double>(members.size());
  Distribution out = Distribution::Zero();
  if (fusion == Fusion::majority_vote) {
    for (const auto& d : members) out(predicted_label(d)) += 1.0;
  } else {
    for (const auto& d : members) out += d;
  }
  return out / n;
}

Distribution fuse(const EnsembleModel& ensemble, Instance instance) { return fuse(ensemble, instance, ensemble.fusion); }

Distribution fuse(const EnsembleModel& ensemble, Instance instance, Fusion fusion) {
  if (ensemble.members.empty()) throw std::invalid_argument("fuse: empty ensemble");
  const auto d = member_distributions(ensemble, instance);
  return fuse_distributions(d, fusion);
}

void write_member(std::ostream& out, const MemberModel& model) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TrainedModel>) {
          out << "member plain\n";
          write_model(out, m);
        } else if constexpr (std::is_same_v<T, SelectedModel>) {
          out << "member selected\n";
          write_selected(out, m);
        } else {
          out << "member cascade\n";
          write_cascade(out, m);
        }
      },
      model);
}

MemberModel read_member(TokenReader& in) {
  in.expect("member");
  const auto kind = in.next();
  if (kind == "plain") return read_model(in);
  if (kind == "selected") return read_selected(in);
  if (kind == "cascade") return read_cascade(in);
  throw FormatError("unknown member kind '" + kind + "'");
}

void write_ensemble(std::ostream& out, const EnsembleModel& model) {
  out << "cascademl-ensemble 1\n";
  out << "construction " << to_string(model.construction) << '\n';
  out << "fusion " << to_string(model.fusion) << '\n';
  write_schema(out, model.schema, model.labels);
  out << "members " << model.members.size() << '\n';
  for (const auto& m : model.members) {
    write_mask(out, m.mask);
    write_member(out, m.model);
  }
  out << "end\n";
}

EnsembleModel read_ensemble(std::istream& stream) {
  TokenReader in(stream);
  return read_ensemble(in);
}

EnsembleModel read_ensemble(TokenReader& in) {
  in.expect("cascademl-ensemble");
  if (in.next_int() != 1) throw FormatError("unsupported ensemble format version");
  EnsembleModel e;
  in.expect("construction");
  const auto construction = in.next();
  if (construction == "bagging") e.construction = Construction::bagging;
  else if (construction == "random_subspace") e.construction = Construction::random_subspace;
  else throw FormatError("unknown construction '" + construction + "'");
  in.expect("fusion");
  try {
    e.fusion = parse_fusion(in.next());
  } catch (const std::invalid_argument& err) {
    throw FormatError(err.what());
  }
  std::tie(e.schema, e.labels) = read_schema(in);
  in.expect("members");
  const auto n = in.next_int();
  if (n < 1) throw FormatError("ensemble needs at least one member");
  for (long long i = 0; i < n; ++i) {
    FeatureMask mask = read_mask(in);
    if (mask.attribute_count() != static_cast<int>(e.schema.size()))
      throw FormatError("ensemble member mask does not fit the schema");
    e.members.push_back({read_member(in), std::move(mask)});
  }
  in.expect("end");
  return e;
}

std::string describe(const EnsembleModel& model) {
  std::ostringstream out;
  out << to_string(model.construction) << " ensemble of " << model.members.size() << " members over "
      << model.schema.size() << " attributes, fusion " << to_string(model.fusion) << '\n';
  for (std::size_t i = 0; i < model.members.size(); ++i) {
    const auto& m = model.members[i];
    out << "\n== member " << i << " mask " << m.mask.to_string() << '\n';
    std::visit(
        [&](const auto& mm) {
          using T = std::decay_t<decltype(mm)>;
          if constexpr (std::is_same_v<T, SelectedModel>)
            out << "selected " << mm.mask.to_string() << '\n' << describe(mm.model);
          else
            out << describe(mm);
        },
        m.model);
  }
  return out.str();
}

}  // namespace cascademl
