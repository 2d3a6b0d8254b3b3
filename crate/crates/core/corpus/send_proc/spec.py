# send_proc -- IPC
def send_proc(old, pid, val):
    cond = z3.And(
        is_pid_valid(pid),
        old.procs[pid].state == dt.proc_state.PROC_SLEEPING,
        z3.Implies(old.procs[pid].ipc_from != 0,
                   old.procs[pid].ipc_from == old.current),
    )
    new = old.copy()
    new.procs[pid].ipc_val = val
    new.procs[pid].ipc_from = old.current
    new.procs[pid].state = dt.proc_state.PROC_RUNNABLE
    return cond, util.If(cond, new, old)
