#include "qkdn/control.hpp"

#include <fmt/format.h>

#include "qkdn/errors.hpp"
#include "qkdn/kms.hpp"

namespace qkdn {

Controller::Controller(Fabric& f, NodeId id) : f_(f), id_(id), km_nodes_(f.topo.km_nodes()) {
  self_ = f_.sim.add_handler(*this, "controller");
  NodeId max_id = 0;
  for (NodeId n : km_nodes_) max_id = std::max(max_id, n);
  ready_.assign(static_cast<std::size_t>(max_id) + 1, false);
}

void Controller::send(MsgId msg) {
  if (f_.via_kms()) {
    f_.ctrl->transmit(id_, f_.gateway_id, msg);
  } else {
    f_.mgmt->transmit(id_, f_.pool[msg].destination, msg);
  }
}

void Controller::on_message(MsgId id) {
  const Message m = f_.pool[id];
  f_.cm_delivered(m);
  f_.pool.release(id);
  switch (m.kind) {
    case MsgKind::setup: {
      if (!ready_.at(static_cast<std::size_t>(m.origin))) {
        ready_[static_cast<std::size_t>(m.origin)] = true;
        ++ready_count_;
      }
      if (ready_count_ == km_nodes_.size() && !distributed_) distribute();
      break;
    }
    case MsgKind::link_status:
      ++link_status_;
      break;
    case MsgKind::route_request: {
      if (!f_.reactive()) throw SimulationFault("routing vector requested under proactive routing");
      const MsgId reply = f_.new_cm(MsgKind::route_reply, id_, m.origin);
      f_.pool[reply].aux = m.aux;
      f_.pool[reply].route = &f_.routes.route(m.origin, m.subject);
      ++vector_replies_;
      send(reply);
      break;
    }
    default:
      throw SimulationFault(fmt::format("controller: unexpected {}", to_string(m.kind)));
  }
}

void Controller::distribute() {
  distributed_ = true;
  f_.app->install_routes(f_.app_routes.tables());
  if (f_.reactive()) {
    push_all(MsgKind::route_init);
  } else {
    push_all(MsgKind::table_push);
    f_.sim.schedule(f_.params.routing_update_period, self_, kPush);
  }
}

void Controller::push_all(MsgKind kind) {
  for (NodeId n : km_nodes_) {
    if (kind == MsgKind::table_push) ++pushes_;
    send(f_.new_cm(kind, id_, n));
  }
}

void Controller::handle(const Event& ev) {
  if (ev.tag != kPush) throw SimulationFault("controller: unknown event tag");
  push_all(MsgKind::table_push);
  f_.sim.schedule(f_.params.routing_update_period, self_, kPush);
}

}  // namespace qkdn
