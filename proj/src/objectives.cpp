#include "xgan/objectives.hpp"

#include <cmath>
#include <optional>
#include <type_traits>

#include "xgan/errors.hpp"

namespace xgan {

namespace {

void require_finite_nonneg(double v, const char* field) {
  if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("weights.") + field + ": must be finite and >= 0");
}

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + ": shape " + a.shape_string() + " vs " + b.shape_string());
}

template <typename T>
void require_embedding(const XganModel<T>& model, const EmbeddingBatch<T>& z, const char* what) {
  if (z.n < 1 || static_cast<int>(z.sample_size()) != model.config().embed_dim)
    throw DimensionError(std::string(what) + ": embedding " + z.shape_string() + " does not have width " +
                         std::to_string(model.config().embed_dim));
}

template <typename T>
void require_images(const XganModel<T>& model, const ImageBatch<T>& x, const char* what) {
  const auto& c = model.config();
  if (x.n < 1) throw DimensionError(std::string(what) + ": empty batch");
  require_shape(x, c.channels, c.image_size, c.image_size, what);
}

/// da += scale * d dist/da, db -= the same.
template <typename T>
void distance_backward(const Tensor<T>& a, const Tensor<T>& b, Distance d, std::type_identity_t<T> scale,
                       std::type_identity_t<Tensor<T>>* da, std::type_identity_t<Tensor<T>>* db) {
  const std::size_t s = a.sample_size();
  for (int i = 0; i < a.n; ++i) {
    const T* pa = a.ptr() + i * s;
    const T* pb = b.ptr() + i * s;
    T k = scale;
    if (d == Distance::L2) {
      T sq = 0;
      for (std::size_t j = 0; j < s; ++j) sq += (pa[j] - pb[j]) * (pa[j] - pb[j]);
      const T norm = std::sqrt(sq);
      if (norm == T(0)) continue;
      k = scale / norm;
    }
    for (std::size_t j = 0; j < s; ++j) {
      const T diff = pa[j] - pb[j];
      const T g = d == Distance::L2 ? k * diff : k * static_cast<T>((diff > 0) - (diff < 0));
      if (da) da->ptr()[i * s + j] += g;
      if (db) db->ptr()[i * s + j] -= g;
    }
  }
}

template <typename T>
T mean_softplus(const Tensor<T>& logits, T sign) {
  T acc = 0;
  for (T l : logits.data) acc += softplus(sign * l);
  return acc / static_cast<T>(logits.n);
}

/// d/dl of mean softplus(sign * l), times scale.
template <typename T>
Tensor<T> mean_softplus_grad(const Tensor<T>& logits, T sign, T scale) {
  Tensor<T> g(logits.n, logits.c, logits.h, logits.w);
  for (std::size_t i = 0; i < g.data.size(); ++i)
    g.data[i] = scale * sign * sigmoid(sign * logits.data[i]) / static_cast<T>(logits.n);
  return g;
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

void LossWeights::validate(bool teacher_available) const {
  require_finite_nonneg(w_dann, "w_dann");
  require_finite_nonneg(w_sem, "w_sem");
  require_finite_nonneg(w_gan, "w_gan");
  require_finite_nonneg(w_teach, "w_teach");
  require_finite_nonneg(tv_weight, "tv_weight");
  if (teach_enabled && !teacher_available) throw ConfigError("weights.teach_enabled requires a configured teacher");
}

void LossConfig::validate() const {
  if (teacher_domains.size() > 1)
    throw ConfigError("loss.teacher_domains: the teacher loss should not be used for both domains simultaneously");
  if (teacher_domains.size() == 1 && teacher_domains[0] != DomainId::D1)
    throw ConfigError("loss.teacher_domains: the teacher is defined on d1 only");
}

double weighted_total(const LossReport& r, const LossWeights& w) {
  double t = r.rec_1 + r.rec_2 + w.w_dann * r.dann + w.w_sem * (r.sem_1to2 + r.sem_2to1) + w.w_gan * r.gan_gen;
  if (w.teach_enabled) t += w.w_teach * r.teach;
  t += w.tv_weight * r.tv;
  return t;
}

template <typename T>
T batch_distance(const Tensor<T>& a, const Tensor<T>& b, Distance d) {
  require_same(a, b, "batch_distance");
  if (a.n < 1) throw DimensionError("batch_distance: empty batch");
  const std::size_t s = a.sample_size();
  T total = 0;
  for (int i = 0; i < a.n; ++i) {
    T acc = 0;
    for (std::size_t j = 0; j < s; ++j) {
      const T diff = a.ptr()[i * s + j] - b.ptr()[i * s + j];
      acc += d == Distance::L2 ? diff * diff : std::abs(diff);
    }
    total += d == Distance::L2 ? std::sqrt(acc) : acc;
  }
  return total / static_cast<T>(a.n);
}

template <typename T>
T reconstruction_loss(const XganModel<T>& model, const ImageBatch<T>& x, DomainId dom) {
  require_images(model, x, "reconstruction_loss");
  return batch_distance(decode(model, encode(model, x, dom), dom), x, Distance::L2);
}

template <typename T>
T dann_loss(const XganModel<T>& model, const EmbeddingBatch<T>& z1, const EmbeddingBatch<T>& z2) {
  require_embedding(model, z1, "dann_loss");
  require_embedding(model, z2, "dann_loss");
  const Tensor<T> l1 = run_forward(model.params(), model.classifier(), z1);
  const Tensor<T> l2 = run_forward(model.params(), model.classifier(), z2);
  return mean_softplus(l1, T(1)) + mean_softplus(l2, T(-1));
}

template <typename T>
DannGradient<T> dann_backward(const XganModel<T>& model, const EmbeddingBatch<T>& z1, const EmbeddingBatch<T>& z2,
                              double w_dann, GradSet<T>* grads, GroupMask mask) {
  require_embedding(model, z1, "dann_backward");
  require_embedding(model, z2, "dann_backward");
  const T w = static_cast<T>(w_dann);
  DannGradient<T> out;
  Trace<T> t1, t2;
  const Tensor<T> l1 = run_forward(model.params(), model.classifier(), z1, &t1);
  const Tensor<T> l2 = run_forward(model.params(), model.classifier(), z2, &t2);
  out.dz1 = run_backward(model.params(), model.classifier(), t1, mean_softplus_grad(l1, T(1), w), grads, mask);
  out.dz2 = run_backward(model.params(), model.classifier(), t2, mean_softplus_grad(l2, T(-1), w), grads, mask);
  for (auto& v : out.dz1.data) v = -v;
  for (auto& v : out.dz2.data) v = -v;
  return out;
}

template <typename T>
SemanticTerms<T> semantic_consistency_loss(const XganModel<T>& model, const ImageBatch<T>& x1,
                                           const ImageBatch<T>& x2, Distance d) {
  require_images(model, x1, "semantic_consistency_loss");
  require_images(model, x2, "semantic_consistency_loss");
  const auto z1 = encode(model, x1, DomainId::D1);
  const auto z2 = encode(model, x2, DomainId::D2);
  const auto z12 = encode(model, decode(model, z1, DomainId::D2), DomainId::D2);
  const auto z21 = encode(model, decode(model, z2, DomainId::D1), DomainId::D1);
  return {batch_distance(z1, z12, d), batch_distance(z2, z21, d)};
}

template <typename T>
GanTerms<T> gan_losses(const XganModel<T>& model, const ImageBatch<T>& x1, const ImageBatch<T>& x2, GanForm form) {
  require_images(model, x1, "gan_losses");
  require_images(model, x2, "gan_losses");
  const Tensor<T> lr = run_forward(model.params(), model.discriminator(), x2);
  const Tensor<T> lf = run_forward(model.params(), model.discriminator(), translate(model, x1, DomainId::D1));
  GanTerms<T> g;
  g.disc = mean_softplus(lr, T(-1)) + mean_softplus(lf, T(1));
  g.gen = form == GanForm::NonSaturating ? mean_softplus(lf, T(-1)) : -mean_softplus(lf, T(1));
  return g;
}

template <typename T>
T gan_minimax_value(const XganModel<T>& model, const ImageBatch<T>& x1, const ImageBatch<T>& x2) {
  return -gan_losses(model, x1, x2, GanForm::Minimax).disc;
}

template <typename T>
T teacher_loss(const XganModel<T>& model, const TeacherNet<T>& teacher, const ImageBatch<T>& x, Distance d) {
  check_teacher_compatible(model.config(), teacher);
  require_images(model, x, "teacher_loss");
  return batch_distance(teacher_embed(teacher, x), encode(model, x, DomainId::D1), d);
}

template <typename T>
T total_variation_loss(const ImageBatch<T>& x) {
  const std::size_t pairs = static_cast<std::size_t>(x.n) * x.c *
                            (static_cast<std::size_t>(x.h) * (x.w - 1) + static_cast<std::size_t>(x.h - 1) * x.w);
  if (pairs == 0) return T(0);
  T acc = 0;
  for (int i = 0; i < x.n; ++i)
    for (int c = 0; c < x.c; ++c)
      for (int y = 0; y < x.h; ++y)
        for (int xx = 0; xx < x.w; ++xx) {
          if (xx + 1 < x.w) acc += std::abs(x.at(i, c, y, xx + 1) - x.at(i, c, y, xx));
          if (y + 1 < x.h) acc += std::abs(x.at(i, c, y + 1, xx) - x.at(i, c, y, xx));
        }
  return acc / static_cast<T>(pairs);
}

template <typename T>
void total_variation_backward(const ImageBatch<T>& x, T scale, ImageBatch<T>& dx) {
  require_same(x, dx, "total_variation_backward");
  const std::size_t pairs = static_cast<std::size_t>(x.n) * x.c *
                            (static_cast<std::size_t>(x.h) * (x.w - 1) + static_cast<std::size_t>(x.h - 1) * x.w);
  if (pairs == 0) return;
  const T k = scale / static_cast<T>(pairs);
  auto sgn = [](T v) { return static_cast<T>((v > 0) - (v < 0)); };
  for (int i = 0; i < x.n; ++i)
    for (int c = 0; c < x.c; ++c)
      for (int y = 0; y < x.h; ++y)
        for (int xx = 0; xx < x.w; ++xx) {
          if (xx + 1 < x.w) {
            const T g = k * sgn(x.at(i, c, y, xx + 1) - x.at(i, c, y, xx));
            dx.at(i, c, y, xx + 1) += g;
            dx.at(i, c, y, xx) -= g;
          }
          if (y + 1 < x.h) {
            const T g = k * sgn(x.at(i, c, y + 1, xx) - x.at(i, c, y, xx));
            dx.at(i, c, y + 1, xx) += g;
            dx.at(i, c, y, xx) -= g;
          }
        }
}

template <typename T>
struct GeneratorPass<T>::State {
  const XganModel<T>* model;
  const TeacherNet<T>* teacher;
  LossWeights w;
  LossConfig cfg;
  LossReport report;
  ImageBatch<T> x1, x2;
  Trace<T> enc1, enc2, rec1, rec2, g12, g21, sem12, sem21, dis12, dis21;
  EmbeddingBatch<T> z1, z2, z12, z21, t1;
  ImageBatch<T> r1, r2, y12, y21;
  Tensor<T> lf12, lf21;
};

template <typename T>
GeneratorPass<T>::GeneratorPass(const XganModel<T>& model, const TeacherNet<T>* teacher, const ImageBatch<T>& b1,
                                const ImageBatch<T>& b2, const LossWeights& w, const LossConfig& cfg)
    : s_(std::make_unique<State>()) {
  w.validate(teacher != nullptr);
  cfg.validate();
  require_images(model, b1, "generator batch 1");
  require_images(model, b2, "generator batch 2");
  if (w.teach_enabled) check_teacher_compatible(model.config(), *teacher);
  if (w.gan_2to1_enabled && !model.has_discriminator_2to1())
    throw ConfigError("weights.gan_2to1_enabled requires model.second_discriminator");
  State& s = *s_;
  s.model = &model;
  s.teacher = teacher;
  s.w = w;
  s.cfg = cfg;
  s.x1 = b1;
  s.x2 = b2;
  const auto& P = model.params();
  s.z1 = run_forward(P, model.encoder(DomainId::D1), b1, &s.enc1);
  s.z2 = run_forward(P, model.encoder(DomainId::D2), b2, &s.enc2);
  s.r1 = run_forward(P, model.decoder(DomainId::D1), s.z1, &s.rec1);
  s.r2 = run_forward(P, model.decoder(DomainId::D2), s.z2, &s.rec2);
  s.y12 = run_forward(P, model.decoder(DomainId::D2), s.z1, &s.g12);
  s.y21 = run_forward(P, model.decoder(DomainId::D1), s.z2, &s.g21);
  s.z12 = run_forward(P, model.encoder(DomainId::D2), s.y12, &s.sem12);
  s.z21 = run_forward(P, model.encoder(DomainId::D1), s.y21, &s.sem21);
  s.lf12 = run_forward(P, model.discriminator(), s.y12, &s.dis12);

  LossReport& r = s.report;
  r.rec_1 = static_cast<double>(batch_distance(s.r1, b1, Distance::L2));
  r.rec_2 = static_cast<double>(batch_distance(s.r2, b2, Distance::L2));
  r.dann = static_cast<double>(dann_loss(model, s.z1, s.z2));
  r.sem_1to2 = static_cast<double>(batch_distance(s.z1, s.z12, cfg.sem_distance));
  r.sem_2to1 = static_cast<double>(batch_distance(s.z2, s.z21, cfg.sem_distance));
  const Tensor<T> lr12 = run_forward(P, model.discriminator(), b2);
  const bool ns = cfg.gan_generator_form == GanForm::NonSaturating;
  auto gen_of = [&](const Tensor<T>& lf) {
    return static_cast<double>(ns ? mean_softplus(lf, T(-1)) : -mean_softplus(lf, T(1)));
  };
  r.gan_gen = gen_of(s.lf12);
  r.gan_disc = static_cast<double>(mean_softplus(lr12, T(-1)) + mean_softplus(s.lf12, T(1)));
  if (w.gan_2to1_enabled) {
    s.lf21 = run_forward(P, model.discriminator_2to1(), s.y21, &s.dis21);
    const Tensor<T> lr21 = run_forward(P, model.discriminator_2to1(), b1);
    r.gan_gen += gen_of(s.lf21);
    r.gan_disc += static_cast<double>(mean_softplus(lr21, T(-1)) + mean_softplus(s.lf21, T(1)));
  }
  if (w.teach_enabled) {
    s.t1 = teacher_embed(*teacher, b1);
    r.teach = static_cast<double>(batch_distance(s.t1, s.z1, cfg.teach_distance));
  }
  r.tv = static_cast<double>(total_variation_loss(s.y12) + total_variation_loss(s.y21));
  r.total = weighted_total(r, w);
}

template <typename T>
GeneratorPass<T>::~GeneratorPass() = default;
template <typename T>
GeneratorPass<T>::GeneratorPass(GeneratorPass&&) noexcept = default;

template <typename T>
const LossReport& GeneratorPass<T>::report() const {
  return s_->report;
}

template <typename T>
void GeneratorPass<T>::backward(GradSet<T>& grads, GroupMask mask, TermMask terms) const {
  const State& s = *s_;
  const XganModel<T>& model = *s.model;
  const auto& P = model.params();
  const LossWeights& w = s.w;
  const bool rec = terms.contains(Term::Rec);
  const bool dann = terms.contains(Term::Dann) && w.w_dann > 0;
  const bool sem = terms.contains(Term::Sem) && w.w_sem > 0;
  const bool gan = terms.contains(Term::Gan) && w.w_gan > 0;
  const bool teach = terms.contains(Term::Teach) && w.teach_enabled && w.w_teach > 0;
  const bool tv = terms.contains(Term::Tv) && w.tv_weight > 0;
  const GroupMask gmask = mask.without(ParamGroup::Discriminator).without(ParamGroup::Discriminator2to1);

  Tensor<T> dz1(s.z1.n, s.z1.c, s.z1.h, s.z1.w), dz2(s.z2.n, s.z2.c, s.z2.h, s.z2.w);
  bool any1 = false, any2 = false;

  auto translation_grad = [&](DomainId target, const ImageBatch<T>& y, const EmbeddingBatch<T>& z_src,
                              const EmbeddingBatch<T>& z_back, const Trace<T>& sem_trace, const Trace<T>* dis_trace,
                              const Tensor<T>* lf, const Net* disc, Tensor<T>& dz_src) {
    std::optional<Tensor<T>> dy;
    auto acc = [&](Tensor<T>&& g) {
      if (dy) add_into(*dy, g);
      else dy = std::move(g);
    };
    if (sem) {
      Tensor<T> dzb(z_back.n, z_back.c, z_back.h, z_back.w);
      distance_backward(z_src, z_back, s.cfg.sem_distance, static_cast<T>(w.w_sem / z_src.n), &dz_src, &dzb);
      acc(run_backward(P, model.encoder(target), sem_trace, dzb, &grads, gmask));
    }
    if (gan && dis_trace) {
      const bool ns = s.cfg.gan_generator_form == GanForm::NonSaturating;
      const Tensor<T> dl = ns ? mean_softplus_grad(*lf, T(-1), static_cast<T>(w.w_gan))
                              : mean_softplus_grad(*lf, T(1), static_cast<T>(-w.w_gan));
      acc(run_backward(P, *disc, *dis_trace, dl, static_cast<GradSet<T>*>(nullptr), GroupMask::none()));
    }
    if (tv) {
      Tensor<T> g(y.n, y.c, y.h, y.w);
      total_variation_backward(y, static_cast<T>(w.tv_weight), g);
      acc(std::move(g));
    }
    return dy;
  };

  if (auto dy12 = translation_grad(DomainId::D2, s.y12, s.z1, s.z12, s.sem12, &s.dis12, &s.lf12,
                                   &model.discriminator(), dz1)) {
    add_into(dz1, run_backward(P, model.decoder(DomainId::D2), s.g12, *dy12, &grads, gmask));
    any1 = true;
  }
  const bool gan21 = w.gan_2to1_enabled;
  if (auto dy21 = translation_grad(DomainId::D1, s.y21, s.z2, s.z21, s.sem21, gan21 ? &s.dis21 : nullptr,
                                   gan21 ? &s.lf21 : nullptr, gan21 ? &model.discriminator_2to1() : nullptr, dz2)) {
    add_into(dz2, run_backward(P, model.decoder(DomainId::D1), s.g21, *dy21, &grads, gmask));
    any2 = true;
  }
  if (sem) any1 = any2 = true;
  if (rec) {
    Tensor<T> dr1(s.r1.n, s.r1.c, s.r1.h, s.r1.w), dr2(s.r2.n, s.r2.c, s.r2.h, s.r2.w);
    distance_backward(s.r1, s.x1, Distance::L2, T(1) / static_cast<T>(s.r1.n), &dr1, nullptr);
    distance_backward(s.r2, s.x2, Distance::L2, T(1) / static_cast<T>(s.r2.n), &dr2, nullptr);
    add_into(dz1, run_backward(P, model.decoder(DomainId::D1), s.rec1, dr1, &grads, gmask));
    add_into(dz2, run_backward(P, model.decoder(DomainId::D2), s.rec2, dr2, &grads, gmask));
    any1 = any2 = true;
  }
  if (dann) {
    DannGradient<T> g = dann_backward(model, s.z1, s.z2, w.w_dann, &grads, gmask);
    add_into(dz1, g.dz1);
    add_into(dz2, g.dz2);
    any1 = any2 = true;
  }
  if (teach) {
    distance_backward(s.z1, s.t1, s.cfg.teach_distance, static_cast<T>(w.w_teach / s.z1.n), &dz1, nullptr);
    any1 = true;
  }
  if (any1) run_backward(P, model.encoder(DomainId::D1), s.enc1, dz1, &grads, gmask, false);
  if (any2) run_backward(P, model.encoder(DomainId::D2), s.enc2, dz2, &grads, gmask, false);
}

template <typename T>
LossReport total_loss(const XganModel<T>& model, const TeacherNet<T>* teacher, const ImageBatch<T>& b1,
                      const ImageBatch<T>& b2, const LossWeights& w, const LossConfig& cfg) {
  return GeneratorPass<T>(model, teacher, b1, b2, w, cfg).report();
}

template <typename T>
T discriminator_gradients(const XganModel<T>& model, const ImageBatch<T>& b1, const ImageBatch<T>& b2,
                          const LossWeights& w, GradSet<T>& grads) {
  require_images(model, b1, "discriminator batch 1");
  require_images(model, b2, "discriminator batch 2");
  const auto& P = model.params();
  auto phase = [&](const Net& disc, const ImageBatch<T>& real, const ImageBatch<T>& fake, ParamGroup group) {
    Trace<T> tr, tf;
    const Tensor<T> lr = run_forward(P, disc, real, &tr);
    const Tensor<T> lf = run_forward(P, disc, fake, &tf);
    const GroupMask m = GroupMask::of({group});
    run_backward(P, disc, tr, mean_softplus_grad(lr, T(-1), T(1)), &grads, m, false);
    run_backward(P, disc, tf, mean_softplus_grad(lf, T(1), T(1)), &grads, m, false);
    return mean_softplus(lr, T(-1)) + mean_softplus(lf, T(1));
  };
  T loss = phase(model.discriminator(), b2, translate(model, b1, DomainId::D1), ParamGroup::Discriminator);
  if (w.gan_2to1_enabled) {
    if (!model.has_discriminator_2to1())
      throw ConfigError("weights.gan_2to1_enabled requires model.second_discriminator");
    loss += phase(model.discriminator_2to1(), b1, translate(model, b2, DomainId::D2), ParamGroup::Discriminator2to1);
  }
  return loss;
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::vector<double> theta, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("finite difference epsilon must be > 0");
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t0 = theta[i];
    theta[i] = t0 + epsilon;
    const double fp = f(theta);
    theta[i] = t0 - epsilon;
    const double fm = f(theta);
    theta[i] = t0;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite difference: non-finite loss at coordinate " + std::to_string(i));
    g[i] = (fp - fm) / (2.0 * epsilon);
  }
  return g;
}

GradSet<double> finite_difference_gradient(const std::function<double(const ParamSet<double>&)>& f,
                                           ParamSet<double> params, double epsilon, GroupMask groups) {
  if (!(epsilon > 0.0)) throw ConfigError("finite difference epsilon must be > 0");
  GradSet<double> g(params);
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!groups.contains(params[p].group)) continue;
    auto& vals = params[p].value.data;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double t0 = vals[i];
      vals[i] = t0 + epsilon;
      const double fp = f(params);
      vals[i] = t0 - epsilon;
      const double fm = f(params);
      vals[i] = t0;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericError("finite difference: non-finite loss at " + params[p].name + "[" + std::to_string(i) + "]");
      g[p].data[i] = (fp - fm) / (2.0 * epsilon);
    }
  }
  return g;
}

#define XGAN_INSTANTIATE_OBJECTIVES(T)                                                                              \
  template T batch_distance<T>(const Tensor<T>&, const Tensor<T>&, Distance);                                      \
  template T reconstruction_loss<T>(const XganModel<T>&, const ImageBatch<T>&, DomainId);                          \
  template T dann_loss<T>(const XganModel<T>&, const EmbeddingBatch<T>&, const EmbeddingBatch<T>&);                \
  template DannGradient<T> dann_backward<T>(const XganModel<T>&, const EmbeddingBatch<T>&,                         \
                                            const EmbeddingBatch<T>&, double, GradSet<T>*, GroupMask);             \
  template SemanticTerms<T> semantic_consistency_loss<T>(const XganModel<T>&, const ImageBatch<T>&,                \
                                                         const ImageBatch<T>&, Distance);                          \
  template GanTerms<T> gan_losses<T>(const XganModel<T>&, const ImageBatch<T>&, const ImageBatch<T>&, GanForm);    \
  template T gan_minimax_value<T>(const XganModel<T>&, const ImageBatch<T>&, const ImageBatch<T>&);                \
  template T teacher_loss<T>(const XganModel<T>&, const TeacherNet<T>&, const ImageBatch<T>&, Distance);           \
  template T total_variation_loss<T>(const ImageBatch<T>&);                                                        \
  template void total_variation_backward<T>(const ImageBatch<T>&, T, ImageBatch<T>&);                              \
  template LossReport total_loss<T>(const XganModel<T>&, const TeacherNet<T>*, const ImageBatch<T>&,               \
                                    const ImageBatch<T>&, const LossWeights&, const LossConfig&);                  \
  template T discriminator_gradients<T>(const XganModel<T>&, const ImageBatch<T>&, const ImageBatch<T>&,           \
                                        const LossWeights&, GradSet<T>&);                                          \
  template class GeneratorPass<T>;

XGAN_INSTANTIATE_OBJECTIVES(float)
XGAN_INSTANTIATE_OBJECTIVES(double)

}  // namespace xgan
