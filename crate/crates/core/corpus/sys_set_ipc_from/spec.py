# sys_set_ipc_from -- IPC
def sys_set_ipc_from(old, sender):
    cond = z3.And(
        sender >= 0,
        sender < dt.NPROC,
        old.procs[old.current].state == dt.proc_state.PROC_RUNNING,
    )
    new = old.copy()
    new.procs[old.current].ipc_from = sender
    return cond, util.If(cond, new, old)
