# sys_dup -- file descriptors
def sys_dup(old, oldfd, newfd):
    cond = z3.And(
        is_fd_valid(oldfd),
        is_fd_valid(newfd),
        oldfd != newfd,
    )
    new = old.copy()
    new.procs[old.current].offs[newfd] = old.procs[old.current].offs(oldfd)
    return cond, util.If(cond, new, old)
