"""Random models and independent finite-difference oracles for tests."""

import numpy as np
from scipy.spatial.transform import Rotation

from fwpkit.contact import ActiveContact
from fwpkit.dynamics import (
    PLANAR,
    SPATIAL,
    Body,
    ContactFrame,
    ContactPoint,
    Joint,
    RobotModel,
    RobotState,
    contact_kinematics,
    embed_planar_point,
    forward_kinematics,
    integrate,
    planar_rotation,
)
from fwpkit.fwp import stick_hrep
from fwpkit.polytope import vertex_enum


def random_spd(rng, scale=1.0):
    A = rng.normal(size=(3, 3))
    return scale * (A @ A.T + 0.5 * np.eye(3))


def random_model(rng, base_type=SPATIAL, n_links=4, n_contacts=2, n_prismatic=1):
    """Random tree with ``n_links`` bodies below the floating base."""
    planar = base_type == PLANAR
    bodies = [_random_body(rng, "base", planar)]
    joints = []
    for k in range(n_links):
        parent = bodies[rng.integers(len(bodies))].name
        name = f"link{k}"
        bodies.append(_random_body(rng, name, planar))
        jtype = "prismatic" if k < n_prismatic else "revolute"
        if planar:
            origin = embed_planar_point(rng.uniform(-0.5, 0.5, 2))
            rot = planar_rotation(rng.uniform(-1, 1))
            if jtype == "revolute":
                axis = np.array([0.0, -1.0, 0.0])
            else:
                a = rng.normal(size=2)
                axis = embed_planar_point(a / np.linalg.norm(a))
        else:
            origin = rng.uniform(-0.5, 0.5, 3)
            rot = Rotation.random(random_state=int(rng.integers(1 << 30))).as_matrix()
            a = rng.normal(size=3)
            axis = a / np.linalg.norm(a)
        joints.append(Joint(f"j{k}", parent, name, jtype, axis, origin, rot))
    actuated = {j.name: (-rng.uniform(5, 50), rng.uniform(5, 50)) for j in joints}
    contacts = []
    for c in range(n_contacts):
        body = bodies[1 + rng.integers(n_links)].name if n_links else "base"
        pos = rng.uniform(-0.3, 0.3, 3)
        if planar:
            pos[1] = 0.0
        contacts.append(ContactPoint(f"c{c}", body, pos))
    return RobotModel(base_type, bodies, joints, actuated, contacts)


def _random_body(rng, name, planar):
    com = rng.uniform(-0.2, 0.2, 3)
    if planar:
        com[1] = 0.0
        inertia = np.eye(3) * rng.uniform(0.05, 1.0)
    else:
        inertia = random_spd(rng, 0.2)
    return Body(name, rng.uniform(0.5, 5.0), com, inertia)


def random_state(rng, model):
    q = rng.uniform(-1, 1, model.n_q)
    if not model.planar:
        quat = rng.normal(size=4)
        q[3:7] = quat / np.linalg.norm(quat)
    v = rng.normal(size=model.n_v)
    return q, v


def fd_derivative(f, h):
    """Fourth-order central difference of ``f`` at 0."""
    return (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h)


def body_twists_fd(model, q, v, eps=3e-4):
    """Angular velocity and CoM velocity of each body by finite differences."""
    kin0 = forward_kinematics(model, q)
    cache = {}

    def kin(t):
        if t not in cache:
            cache[t] = forward_kinematics(model, integrate(model, q, v, t))
        return cache[t]

    out = {}
    for b in model.bodies:
        R0 = kin0.R[b.name]
        w = fd_derivative(lambda t: Rotation.from_matrix(kin(t).R[b.name] @ R0.T).as_rotvec(), eps)
        c = fd_derivative(lambda t: kin(t).com[b.name], eps)
        out[b.name] = (w, c)
    return out


def kinetic_energy(model, kin, twists):
    """Sum of per-body kinetic energies given (omega, com velocity)."""
    ke = 0.0
    for b in model.bodies:
        w, c = twists[b.name]
        Iw = kin.R[b.name] @ b.inertia @ kin.R[b.name].T
        ke += 0.5 * b.mass * c @ c + 0.5 * w @ Iw @ w
    return ke


def bias_forces_fd(model, q, v, gravity, eps=1e-3):
    """Generalized bias force from body momentum rates (virtual power).

    For each body, the net external wrench equals the rate of change of
    its momentum along the flow of constant ``v``; projecting with the
    body Jacobian (itself taken by finite differences) gives ``h``.
    """
    g = np.asarray(gravity, dtype=float)
    if model.planar and g.shape[0] == 2:
        g = embed_planar_point(g)
    n = model.n_v

    def momenta(qq):
        kin = forward_kinematics(model, qq)
        tw = body_twists_fd(model, qq, v)
        out = {}
        for b in model.bodies:
            w, c = tw[b.name]
            Iw = kin.R[b.name] @ b.inertia @ kin.R[b.name].T
            out[b.name] = (b.mass * c, Iw @ w)
        return out

    mp = momenta(integrate(model, q, v, eps))
    mm = momenta(integrate(model, q, v, -eps))
    mp2 = momenta(integrate(model, q, v, 2 * eps))
    mm2 = momenta(integrate(model, q, v, -2 * eps))

    def rate(name, k):
        return (8 * (mp[name][k] - mm[name][k]) - (mp2[name][k] - mm2[name][k])) / (12 * eps)

    # per-body Jacobians of (omega, com velocity) by finite differences
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(body_twists_fd(model, q, e))
    h = np.zeros(n)
    for b in model.bodies:
        pdot = rate(b.name, 0)
        ldot = rate(b.name, 1)
        force = pdot - b.mass * g
        for k in range(n):
            w, c = cols[k][b.name]
            h[k] += c @ force + w @ ldot
    return h


def random_contacts(rng, model, q, tilt=0.3):
    """Active contacts at the model's contact points, normals roughly up."""
    kin = forward_kinematics(model, q)
    contacts = []
    for name, cp in model.contact_points.items():
        pos = kin.p[cp.body] + kin.R[cp.body] @ cp.position
        if model.planar:
            n = np.array([rng.uniform(-tilt, tilt), 1.0])
            frame = ContactFrame.planar(n, origin=pos[[0, 2]])
        else:
            n = np.array([*rng.uniform(-tilt, tilt, 2), 1.0])
            frame = ContactFrame.spatial(n, origin=pos)
        contacts.append(ActiveContact(name, frame, float(rng.uniform(0.4, 1.0))))
    return contacts


def established_velocity(model, q, v, contacts):
    """Project ``v`` onto the velocities that keep every contact point at rest."""
    J = np.vstack([contact_kinematics(model, q, v, c.name, c.frame).jacobian_contact_frame
                   for c in contacts])
    _, s, Vt = np.linalg.svd(J)
    r = int(np.sum(s > 1e-10 * s[0]))
    N = Vt[r:].T
    return N @ (N.T @ v)


def random_scenario(rng, base_type=PLANAR, n_contacts=2, n_links=4, g=3.0, f_max=None,
                    vel_scale=0.3, tries=50):
    """Random model, established state and contacts with a non-empty stick set."""
    for _ in range(tries):
        model = random_model(rng, base_type, n_links, n_contacts)
        q, v = random_state(rng, model)
        contacts = random_contacts(rng, model, q)
        v = established_velocity(model, q, vel_scale * v, contacts)
        gravity = np.array([0.0, -g]) if model.planar else np.array([0.0, 0.0, -g])
        state = RobotState(q, v)
        P = stick_hrep(model, state, contacts, gravity=gravity, f_max=f_max)
        V = vertex_enum(P)
        if not V.is_empty and V.is_bounded:
            return model, state, contacts, gravity
    raise RuntimeError("no feasible random scenario found")


def replay(model, state, contacts, x, gravity, opened=()):
    """Replay ``x = (f_s, u)`` through the contact-constrained dynamics.

    Returns ``(forces, sticking accelerations, opened normal accelerations)``
    where the dynamics only constrain contacts not listed in ``opened``.
    """
    from fwpkit.dynamics import constrained_forward_dynamics

    stick = [c for c in contacts if c.name not in opened]
    nf = model.t * len(stick)
    u = x[nf:]
    res = constrained_forward_dynamics(model, state, u, [(c.name, c.frame) for c in stick], gravity)
    acc = []
    for c in contacts:
        ck = contact_kinematics(model, state.q, state.v, c.name, c.frame)
        acc.append(ck.jacobian_contact_frame @ res.vdot + ck.bias_accel_contact_frame)
    by_name = dict(zip([c.name for c in contacts], acc))
    stick_acc = np.concatenate([by_name[c.name] for c in stick])
    open_normal = np.array([by_name[n][-1] for n in opened])
    return res.forces.reshape(-1), stick_acc, open_normal


def planar_biped(hip=0.5, knee=-0.4, mu=0.6, limits=(60.0, 40.0), heights=(0.0, 0.0)):
    """Symmetric planar biped; the right leg mirrors the left one.

    Returns ``(model, state, contacts)`` with both feet established.
    """
    torso = Body("torso", 20.0, embed_planar_point([0.0, 0.2]), np.eye(3) * 1.0)
    bodies, joints, cps = [torso], [], []
    for side in ("l", "r"):
        bodies += [
            Body(f"thigh_{side}", 5.0, embed_planar_point([0.0, -0.2]), np.eye(3) * 0.08),
            Body(f"shank_{side}", 3.0, embed_planar_point([0.0, -0.2]), np.eye(3) * 0.04),
        ]
        ax = np.array([0.0, -1.0, 0.0])
        joints += [
            Joint(f"hip_{side}", "torso", f"thigh_{side}", "revolute", ax, np.zeros(3), np.eye(3)),
            Joint(f"knee_{side}", f"thigh_{side}", f"shank_{side}", "revolute", ax,
                  embed_planar_point([0.0, -0.4]), np.eye(3)),
        ]
        cps.append(ContactPoint(f"foot_{side}", f"shank_{side}", embed_planar_point([0.0, -0.4])))
    act = {}
    for side in ("l", "r"):
        act[f"hip_{side}"] = (-limits[0], limits[0])
        act[f"knee_{side}"] = (-limits[1], limits[1])
    model = RobotModel(PLANAR, bodies, joints, act, cps)
    q = np.array([0.0, 0.0, 0.0, hip, knee, -hip, -knee])
    kin = forward_kinematics(model, q)
    feet = {n: kin.p[cp.body] + kin.R[cp.body] @ cp.position for n, cp in model.contact_points.items()}
    q[1] = -feet["foot_l"][2] + heights[0]
    contacts = []
    for n, hgt in zip(("foot_l", "foot_r"), heights):
        p = feet[n] + np.array([0.0, 0.0, q[1]])
        contacts.append(ActiveContact(n, ContactFrame.planar([0.0, 1.0], origin=p[[0, 2]]), mu))
    return model, RobotState(q, np.zeros(7)), contacts
