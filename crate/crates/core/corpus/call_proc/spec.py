# call_proc -- IPC
def call_proc(old, pid, val):
    cond = z3.And(
        is_pid_valid(pid),
        pid != old.current,
        old.procs[pid].state == dt.proc_state.PROC_SLEEPING,
        z3.Implies(old.procs[pid].ipc_from != 0,
                   old.procs[pid].ipc_from == old.current),
        old.procs[old.current].state == dt.proc_state.PROC_RUNNING,
    )
    new = old.copy()
    new.procs[pid].ipc_val = val
    new.procs[pid].ipc_from = old.current
    new.procs[pid].state = dt.proc_state.PROC_RUNNABLE
    new.procs[old.current].ipc_from = pid
    new.procs[old.current].state = dt.proc_state.PROC_SLEEPING
    return cond, util.If(cond, new, old)
